#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace lobster {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Binary class labels, 0 or 1.
using Labels = std::vector<int>;

enum class Sex { kMale, kFemale };
enum class Age { kAdult, kJuvenile };

/// Which binary problem a label vector encodes.
enum class Task { kAge, kSex };

/// Native recording rate of the hydrophone rig.
inline constexpr int kDefaultSampleRate = 22050;

Sex parse_sex(std::string_view text);
Age parse_age(std::string_view text);
Task parse_task(std::string_view text);

std::string to_string(Sex sex);
std::string to_string(Age age);
std::string to_string(Task task);

/// Positive class is Juvenile for the age task and Female for the sex task.
int task_label(Task task, Sex sex, Age age);

/// Name of the class encoded as `label` for `task`.
std::string class_name(Task task, int label);

}  // namespace lobster
