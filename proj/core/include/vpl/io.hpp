#pragma once

#include <string>
#include <vector>

namespace vpl {

/// CSV writer with %.17g numerics so serial reruns are byte-identical.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_row(const std::vector<std::string>& cells);
  void add_row_mixed(const std::vector<std::pair<bool, double>>& unused) = delete;

  std::string str() const;
  void write(const std::string& path) const;

  static std::string fmt(double v);

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::string& path, const std::string& content);

}  // namespace vpl
