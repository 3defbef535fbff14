#include "agnostic/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "agnostic/tensor_io.hpp"

namespace agnostic {
namespace {

std::runtime_error bad(const std::string& what) {
  return std::runtime_error("checkpoint: " + what);
}

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw bad("unexpected end of file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Network& net) {
  out << kCheckpointMagic << '\n';
  out << "input:";
  for (std::size_t d : net.input_shape()) out << ' ' << d;
  out << '\n' << "classes: " << net.num_classes() << '\n';
  out << "architecture:\n" << to_string(net.architecture()) << "end\n";
  for (const auto& entry : net.params().entries()) {
    out << "param " << entry.name << '\n';
    write_tensor(out, entry.value);
  }
}

Network load_checkpoint(std::istream& in) {
  if (next_line(in) != kCheckpointMagic) throw bad("not a checkpoint or unsupported version");

  std::istringstream input(next_line(in));
  std::string tag;
  input >> tag;
  if (tag != "input:") throw bad("expected 'input:'");
  Shape shape;
  for (std::size_t d; input >> d;) shape.push_back(d);
  if (shape.empty()) throw bad("empty input shape");

  std::istringstream classes(next_line(in));
  std::size_t num_classes = 0;
  if (!(classes >> tag >> num_classes) || tag != "classes:") throw bad("expected 'classes: N'");

  if (next_line(in) != "architecture:") throw bad("expected 'architecture:'");
  std::string arch_text;
  for (std::string line = next_line(in); line != "end"; line = next_line(in)) arch_text += line + '\n';

  Network net = Network::create(parse_architecture(arch_text), shape, num_classes, 0);
  std::size_t loaded = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("param ", 0) != 0) throw bad("expected 'param <name>', got '" + line + "'");
    const std::string name = line.substr(6);
    if (!net.params().contains(name)) throw bad("unknown parameter " + name);
    Tensor& target = net.params().get(name);
    const Tensor value = read_tensor(in);
    if (value.shape() != target.shape()) {
      throw bad(name + " has shape " + shape_string(value.shape()) + ", expected " +
                shape_string(target.shape()));
    }
    std::copy(value.data().begin(), value.data().end(), target.mutable_data().begin());
    ++loaded;
  }
  if (loaded != net.params().size()) {
    throw bad("expected " + std::to_string(net.params().size()) + " parameters, found " +
              std::to_string(loaded));
  }
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw bad("cannot write " + path.string());
  save_checkpoint(out, net);
  if (!out) throw bad("write failed for " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw bad("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace agnostic
