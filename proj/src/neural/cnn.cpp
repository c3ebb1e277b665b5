#include "lobster/neural/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::neural {

using learners::sigmoid;
using learners::softplus;

DilationSchedule parse_dilation_schedule(const std::string& name) {
  if (name == "exponential") return DilationSchedule::kExponential;
  if (name == "linear") return DilationSchedule::kLinear;
  throw ValidationError("unknown dilation schedule '" + name + "'");
}

bool CnnSpec::dilated() const {
  return dilated_variant || std::any_of(layers.begin(), layers.end(), [](const ConvBlock& b) { return b.dilation > 1; });
}

void validate(const CnnSpec& spec) {
  if (spec.layers.empty() || spec.layers.size() > 4) {
    throw ValidationError("a CNN needs between 1 and 4 convolution blocks");
  }
  for (const auto& b : spec.layers) {
    if (b.filters < 1) throw ValidationError("filters must be >= 1");
    if (b.kernel < 1 || b.kernel % 2 == 0) throw ValidationError("kernel size must be odd");
    if (b.dilation < 1) throw ValidationError("dilation must be >= 1");
    if (b.pool < 0) throw ValidationError("pool size must be >= 1 (or 0 for auto)");
  }
  if (spec.dense_units < 1) throw ValidationError("dense units must be >= 1");
  if (spec.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (spec.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (spec.patience < 1) throw ValidationError("patience must be >= 1");
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0)) {
    throw ValidationError("validation fraction must lie in (0, 1)");
  }
  if (!(spec.optimizer.learning_rate >= 0.0)) throw ValidationError("learning rate must be >= 0");
}

std::vector<int> dcnn_dilation_schedule(int n_layers, DilationSchedule schedule) {
  if (n_layers < 1 || n_layers > 4) throw ValidationError("dilation schedule needs 1-4 layers");
  std::vector<int> out;
  for (int i = 0; i < n_layers; ++i) {
    out.push_back(schedule == DilationSchedule::kExponential ? 1 << i : i + 1);
  }
  return out;
}

int receptive_field(int kernel, const std::vector<int>& dilations) {
  int rf = 1;
  for (int d : dilations) rf += (kernel - 1) * d;
  return rf;
}

CnnSpec resolve_auto_pool(const CnnSpec& spec, int input_length) {
  CnnSpec out = spec;
  const auto n = out.layers.size();
  int length = input_length;
  for (std::size_t i = 0; i < n; ++i) {
    auto& b = out.layers[i];
    const int conv_len = length - (b.kernel - 1) * b.dilation;
    int need = 1;
    for (std::size_t j = i + 1; j < n; ++j) need += (out.layers[j].kernel - 1) * out.layers[j].dilation;
    if (b.pool == 0) b.pool = conv_len / 2 >= need ? 2 : 1;
    if (conv_len < 1 || conv_len / b.pool < need) {
      throw ValidationError(std::to_string(n) + "-layer network does not fit input length " +
                            std::to_string(input_length));
    }
    length = conv_len / b.pool;
  }
  return out;
}

CnnSpec default_cnn_spec(int n_layers, bool dilated, int input_length, DilationSchedule schedule) {
  const auto dil = dcnn_dilation_schedule(n_layers, schedule);
  CnnSpec spec;
  spec.layers.clear();
  spec.dilated_variant = dilated;
  static constexpr int kDense[] = {128, 64, 128, 128};
  spec.dense_units = kDense[n_layers - 1];
  spec.epochs = n_layers == 1 ? 10 : 20;
  for (int i = 0; i < n_layers; ++i) {
    ConvBlock b;
    b.filters = 64 << i;
    b.kernel = 3;
    b.dilation = dilated ? dil[static_cast<std::size_t>(i)] : 1;
    b.pool = 0;
    spec.layers.push_back(b);
  }
  return resolve_auto_pool(spec, input_length);
}

CnnLayout plan_cnn(const CnnSpec& spec, int input_length) {
  validate(spec);
  for (const auto& b : spec.layers) {
    if (b.pool == 0) throw ValidationError("unresolved auto pool size");
  }
  CnnLayout L;
  L.input_length = input_length;
  int length = input_length;
  int channels = 1;
  std::size_t offset = 0;
  for (const auto& b : spec.layers) {
    LayerPlan p;
    p.conv = ConvShape{channels, b.filters, b.kernel, b.dilation};
    p.pool = b.pool;
    p.in_length = length;
    p.conv_length = p.conv.output_length(length);
    p.out_length = p.conv_length / b.pool;
    if (p.out_length < 1) throw ValidationError("pooling underflows the feature map");
    p.weight_offset = offset;
    offset += p.conv.weight_count();
    p.bias_offset = offset;
    offset += static_cast<std::size_t>(b.filters);
    L.convs.push_back(p);
    length = p.out_length;
    channels = b.filters;
  }
  L.flat = length * channels;
  L.dense_units = spec.dense_units;
  L.dense_w = offset;
  offset += static_cast<std::size_t>(L.flat) * static_cast<std::size_t>(L.dense_units);
  L.dense_b = offset;
  offset += static_cast<std::size_t>(L.dense_units);
  L.out_w = offset;
  offset += static_cast<std::size_t>(L.dense_units);
  L.out_b = offset;
  L.total = offset + 1;
  return L;
}

Vector cnn_init(const CnnLayout& L, std::uint64_t seed) {
  Vector p = Vector::Zero(static_cast<Eigen::Index>(L.total));
  Rng rng(seed);
  auto fill = [&](std::size_t off, std::size_t count, double fan_in, double fan_out) {
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) p(static_cast<Eigen::Index>(off + i)) = rng.uniform(-lim, lim);
  };
  for (const auto& c : L.convs) {
    fill(c.weight_offset, c.conv.weight_count(), c.conv.kernel * c.conv.in_channels,
         c.conv.kernel * c.conv.filters);
  }
  fill(L.dense_w, static_cast<std::size_t>(L.flat * L.dense_units), L.flat, L.dense_units);
  fill(L.out_w, static_cast<std::size_t>(L.dense_units), L.dense_units, 1);
  return p;
}

namespace {

struct SampleCache {
  std::vector<Tensor1D> inputs;
  std::vector<Tensor1D> pre;
  std::vector<PoolResult> pools;
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  double margin = 0.0;
};

void check_input(const CnnLayout& L, const Vector& params, const Matrix& X) {
  if (X.cols() != L.input_length) {
    throw ValidationError("CNN expects input length " + std::to_string(L.input_length) + ", got " +
                          std::to_string(X.cols()));
  }
  if (static_cast<std::size_t>(params.size()) != L.total) throw ValidationError("CNN parameter count mismatch");
}

void forward_sample(const CnnLayout& L, const double* p, const Eigen::Ref<const Vector>& x,
                    SampleCache& s) {
  s.inputs.clear();
  s.pre.clear();
  s.pools.clear();
  Tensor1D t = as_sequence(x);
  for (const auto& c : L.convs) {
    s.inputs.push_back(t);
    Tensor1D z = conv1d_forward(t, c.conv, p + c.weight_offset, p + c.bias_offset);
    Tensor1D a = z;
    relu_inplace(a);
    s.pre.push_back(std::move(z));
    PoolResult pr = maxpool1d(a, c.pool);
    t = pr.output;
    s.pools.push_back(std::move(pr));
  }
  const auto U = static_cast<std::size_t>(L.dense_units);
  const auto F = static_cast<std::size_t>(L.flat);
  s.hidden_pre.assign(U, 0.0);
  s.hidden.assign(U, 0.0);
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMatrix> W(p + L.dense_w, static_cast<Eigen::Index>(U), static_cast<Eigen::Index>(F));
  Eigen::Map<const Vector> flat(t.data.data(), static_cast<Eigen::Index>(F));
  Eigen::Map<Vector> pre(s.hidden_pre.data(), static_cast<Eigen::Index>(U));
  Eigen::Map<Vector> hid(s.hidden.data(), static_cast<Eigen::Index>(U));
  pre.noalias() = W * flat;
  pre += Eigen::Map<const Vector>(p + L.dense_b, static_cast<Eigen::Index>(U));
  hid = pre.cwiseMax(0.0);
  s.margin = p[L.out_b] + Eigen::Map<const Vector>(p + L.out_w, static_cast<Eigen::Index>(U)).dot(hid);
}

}  // namespace

Vector cnn_forward(const CnnLayout& L, const Vector& params, const Matrix& X) {
  check_input(L, params, X);
  Vector out(X.rows());
  SampleCache s;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    forward_sample(L, params.data(), X.row(i).transpose(), s);
    out(i) = sigmoid(s.margin);
  }
  return out;
}

double cnn_loss_and_gradient(const CnnLayout& L, const Vector& params, const Matrix& X,
                             const Labels& y, Vector* grad) {
  check_input(L, params, X);
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw ValidationError("label count mismatch");
  const double* p = params.data();
  const auto n = static_cast<double>(X.rows());
  if (grad) *grad = Vector::Zero(params.size());
  double loss = 0.0;
  SampleCache s;
  const auto U = static_cast<std::size_t>(L.dense_units);
  const auto F = static_cast<std::size_t>(L.flat);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    forward_sample(L, p, X.row(i).transpose(), s);
    const int yi = y[static_cast<std::size_t>(i)];
    loss += softplus(s.margin) - yi * s.margin;
    if (!grad) continue;

    double* g = grad->data();
    const double dz = (sigmoid(s.margin) - yi) / n;
    g[L.out_b] += dz;
    const Tensor1D& flat = s.pools.back().output;
    Tensor1D dflat(flat.length, flat.channels);
    {
      using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
      const auto Ui = static_cast<Eigen::Index>(U);
      const auto Fi = static_cast<Eigen::Index>(F);
      Eigen::Map<const Vector> hid(s.hidden.data(), Ui);
      Eigen::Map<const Vector> pre(s.hidden_pre.data(), Ui);
      Eigen::Map<Vector>(g + L.out_w, Ui) += dz * hid;
      const Vector dh = (pre.array() > 0.0).select(dz * Eigen::Map<const Vector>(p + L.out_w, Ui), 0.0);
      Eigen::Map<Vector>(g + L.dense_b, Ui) += dh;
      Eigen::Map<const Vector> fl(flat.data.data(), Fi);
      Eigen::Map<RowMatrix>(g + L.dense_w, Ui, Fi).noalias() += dh * fl.transpose();
      Eigen::Map<Vector>(dflat.data.data(), Fi).noalias() =
          Eigen::Map<const RowMatrix>(p + L.dense_w, Ui, Fi).transpose() * dh;
    }
    Tensor1D up = std::move(dflat);
    for (std::size_t li = L.convs.size(); li-- > 0;) {
      const auto& c = L.convs[li];
      Tensor1D da = maxpool1d_backward(s.pools[li], c.conv_length, up);
      const auto& z = s.pre[li];
      for (std::size_t k = 0; k < da.data.size(); ++k) {
        if (z.data[k] <= 0.0) da.data[k] = 0.0;
      }
      up = conv1d_backward(s.inputs[li], c.conv, p + c.weight_offset, da, g + c.weight_offset,
                           g + c.bias_offset);
    }
  }
  return loss / n;
}

CnnModel train_cnn(const CnnSpec& spec, const Matrix& X, const Labels& y, std::uint64_t seed) {
  learners::check_training_set(X, y);
  CnnModel model;
  model.spec = resolve_auto_pool(spec, static_cast<int>(X.cols()));
  model.layout = plan_cnn(model.spec, static_cast<int>(X.cols()));
  if (X.rows() < spec.batch_size) {
    throw ValidationError("CNN training needs at least batch_size (" + std::to_string(spec.batch_size) +
                          ") rows, got " + std::to_string(X.rows()));
  }
  model.params = cnn_init(model.layout, seed);
  Rng rng = Rng(seed).split(1);

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> train_idx = order, val_idx;
  if (spec.early_stopping) {
    rng.shuffle(order);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(spec.validation_fraction * static_cast<double>(y.size()))));
    if (n_val >= y.size()) throw ValidationError("too few rows for a CNN validation split");
    val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
  }
  auto gather = [&](const std::vector<std::size_t>& idx, Matrix& Xs, Labels& ys) {
    Xs.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
    ys.resize(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      Xs.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
      ys[r] = y[idx[r]];
    }
  };
  Matrix Xv, Xb;
  Labels yv, yb;
  if (spec.early_stopping) gather(val_idx, Xv, yv);

  Optimizer opt(spec.optimizer, model.params.size());
  const auto batch = static_cast<std::size_t>(spec.batch_size);
  Vector best = model.params;
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  Vector grad;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::vector<std::size_t> perm = train_idx;
    rng.shuffle(perm);
    double total = 0.0;
    for (std::size_t start = 0; start < perm.size(); start += batch) {
      const std::size_t end = std::min(perm.size(), start + batch);
      gather({perm.begin() + static_cast<std::ptrdiff_t>(start), perm.begin() + static_cast<std::ptrdiff_t>(end)}, Xb, yb);
      const double loss = cnn_loss_and_gradient(model.layout, model.params, Xb, yb, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw ConvergenceError("CNN loss became non-finite at epoch " + std::to_string(epoch));
      }
      total += loss * static_cast<double>(end - start);
      opt.step(model.params, grad);
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = total / static_cast<double>(perm.size());
    if (spec.early_stopping) {
      log.val_loss = cnn_loss_and_gradient(model.layout, model.params, Xv, yv, nullptr);
      const Vector pv = cnn_forward(model.layout, model.params, Xv);
      int correct = 0;
      for (Eigen::Index i = 0; i < pv.size(); ++i) correct += (pv(i) > 0.5 ? 1 : 0) == yv[static_cast<std::size_t>(i)];
      log.val_accuracy = static_cast<double>(correct) / static_cast<double>(pv.size());
    }
    model.curve.push_back(log);
    if (!spec.early_stopping) {
      model.best_epoch = epoch;
      continue;
    }
    if (log.val_loss < best_val) {
      best_val = log.val_loss;
      best = model.params;
      model.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= spec.patience) {
      break;
    }
  }
  if (spec.early_stopping) model.params = best;
  return model;
}

Matrix cnn_predict_proba(const CnnModel& model, const Matrix& X) {
  if (X.rows() == 0) throw ValidationError("empty query");
  return learners::two_column(cnn_forward(model.layout, model.params, X));
}

nlohmann::json to_json(const CnnSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& b : spec.layers) {
    layers.push_back({{"filters", b.filters}, {"kernel", b.kernel}, {"dilation", b.dilation}, {"pool", b.pool}});
  }
  return {{"layers", layers},
          {"dense", spec.dense_units},
          {"optimizer", to_string(spec.optimizer.kind)},
          {"learning_rate", spec.optimizer.learning_rate},
          {"batch_size", spec.batch_size},
          {"epochs", spec.epochs},
          {"early_stopping", spec.early_stopping},
          {"patience", spec.patience},
          {"validation_fraction", spec.validation_fraction},
          {"variant", spec.dilated() ? "dcnn" : "cnn"}};
}

CnnSpec cnn_spec_from_json(const nlohmann::json& node) {
  static const std::vector<std::string> kKeys = {"layers", "dense", "optimizer", "learning_rate", "batch_size",
                                                 "epochs", "early_stopping", "patience", "validation_fraction", "variant"};
  for (const auto& [k, v] : node.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) throw ValidationError("unknown CNN key '" + k + "'");
  }
  CnnSpec spec;
  spec.layers.clear();
  for (const auto& l : node.at("layers")) {
    for (const auto& [k, v] : l.items()) {
      if (k != "filters" && k != "kernel" && k != "dilation" && k != "pool") {
        throw ValidationError("unknown CNN layer key '" + k + "'");
      }
    }
    ConvBlock b;
    b.filters = l.value("filters", b.filters);
    b.kernel = l.value("kernel", b.kernel);
    b.dilation = l.value("dilation", b.dilation);
    b.pool = l.value("pool", b.pool);
    spec.layers.push_back(b);
  }
  spec.dense_units = node.value("dense", spec.dense_units);
  if (node.contains("optimizer")) spec.optimizer.kind = parse_optimizer(node.at("optimizer").get<std::string>());
  spec.optimizer.learning_rate = node.value("learning_rate", spec.optimizer.learning_rate);
  spec.batch_size = node.value("batch_size", spec.batch_size);
  spec.epochs = node.value("epochs", spec.epochs);
  spec.early_stopping = node.value("early_stopping", spec.early_stopping);
  spec.patience = node.value("patience", spec.patience);
  spec.validation_fraction = node.value("validation_fraction", spec.validation_fraction);
  if (node.contains("variant")) {
    const auto v = node.at("variant").get<std::string>();
    if (v != "cnn" && v != "dcnn") throw ValidationError("CNN variant must be cnn or dcnn");
    spec.dilated_variant = v == "dcnn";
  }
  validate(spec);
  return spec;
}

std::string display_name(const CnnSpec& spec) {
  return std::string(spec.dilated() ? "1D-DCNN" : "1D-CNN") + " (" + std::to_string(spec.layers.size()) + " L)";
}

}  // namespace lobster::neural
