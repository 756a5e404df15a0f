#pragma once

#include <stdexcept>
#include <string>

namespace clearn {

// Library failures carry a stable kebab-case category ("invalid-input",
// "parse-error", "calibration-error", ...) so callers can dispatch without
// scraping the message text. The CLI prints one line: "error: <what>".
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(category + ": " + message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

}  // namespace clearn
