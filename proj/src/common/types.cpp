#include "lobster/common/types.hpp"

#include <algorithm>
#include <cctype>

#include "lobster/common/error.hpp"

namespace lobster {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Sex parse_sex(std::string_view text) {
  const auto value = lower(text);
  if (value == "m" || value == "male") return Sex::kMale;
  if (value == "f" || value == "female") return Sex::kFemale;
  throw ValidationError("unknown sex label '" + std::string(text) + "' (expected M or F)");
}

Age parse_age(std::string_view text) {
  const auto value = lower(text);
  if (value == "adult") return Age::kAdult;
  if (value == "juvenile") return Age::kJuvenile;
  throw ValidationError("unknown age label '" + std::string(text) +
                        "' (expected adult or juvenile)");
}

Task parse_task(std::string_view text) {
  const auto value = lower(text);
  if (value == "age") return Task::kAge;
  if (value == "sex") return Task::kSex;
  throw ValidationError("unknown task '" + std::string(text) + "' (expected age or sex)");
}

std::string to_string(Sex sex) { return sex == Sex::kMale ? "M" : "F"; }
std::string to_string(Age age) { return age == Age::kAdult ? "adult" : "juvenile"; }
std::string to_string(Task task) { return task == Task::kAge ? "age" : "sex"; }

int task_label(Task task, Sex sex, Age age) {
  if (task == Task::kAge) return age == Age::kJuvenile ? 1 : 0;
  return sex == Sex::kFemale ? 1 : 0;
}

std::string class_name(Task task, int label) {
  if (task == Task::kAge) return label == 1 ? "juvenile" : "adult";
  return label == 1 ? "female" : "male";
}

}  // namespace lobster
