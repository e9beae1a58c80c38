#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace dualmdp {

// Text tensor dump: a JSON header line followed by one line per tensor
// ("name count v0 v1 ..."), values printed with full double precision.
std::string format_double(double v);

class CheckpointWriter {
 public:
  explicit CheckpointWriter(const std::string& path);
  void header(const std::map<std::string, std::string>& fields);
  void tensor(const std::string& name, const std::vector<double>& values);

 private:
  std::ofstream out_;
};

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::string& path);
  const std::string& header_at(const std::string& key) const;
  bool has_header(const std::string& key) const;
  const std::vector<double>& tensor(const std::string& name) const;

 private:
  std::map<std::string, std::string> header_;
  std::map<std::string, std::vector<double>> tensors_;
};

}  // namespace dualmdp
