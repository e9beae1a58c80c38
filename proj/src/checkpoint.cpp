#include "dualmdp/checkpoint.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dualmdp {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CheckpointWriter::CheckpointWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot write checkpoint: " + path);
}

void CheckpointWriter::header(const std::map<std::string, std::string>& fields) {
  nlohmann::json j(fields);
  out_ << j.dump() << "\n";
}

void CheckpointWriter::tensor(const std::string& name,
                              const std::vector<double>& values) {
  out_ << name << " " << values.size();
  for (double v : values) out_ << " " << format_double(v);
  out_ << "\n";
}

CheckpointReader::CheckpointReader(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("checkpoint missing header: " + path);
  nlohmann::json j = nlohmann::json::parse(line);
  for (auto it = j.begin(); it != j.end(); ++it)
    header_[it.key()] = it.value().get<std::string>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    size_t count = 0;
    ls >> name >> count;
    std::vector<double> values(count);
    for (size_t i = 0; i < count; ++i) ls >> values[i];
    if (!ls) throw std::runtime_error("checkpoint tensor truncated: " + name);
    tensors_[name] = std::move(values);
  }
}

const std::string& CheckpointReader::header_at(const std::string& key) const {
  auto it = header_.find(key);
  if (it == header_.end())
    throw std::runtime_error("checkpoint header missing key: " + key);
  return it->second;
}

bool CheckpointReader::has_header(const std::string& key) const {
  return header_.count(key) > 0;
}

const std::vector<double>& CheckpointReader::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw std::runtime_error("checkpoint missing tensor: " + name);
  return it->second;
}

}  // namespace dualmdp
