#include "agnostic/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace agnostic {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_label(const std::string& text, const std::string& where) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw FormatError(where + ": bad label '" + text + "'");
  }
  return value;
}

std::string mask_name(const std::string& image_file) {
  const std::string stem = image_file.substr(0, image_file.size() - 4);
  return stem + ".mask.pgm";
}

}  // namespace

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream manifest(dir / kManifestName);
  if (!manifest) throw std::runtime_error("cannot write " + (dir / kManifestName).string());
  manifest << "filename,target_label,protected_label,split\n";
  for (Split split : kAllSplits) {
    for (const Example& ex : dataset.split(split)) {
      const std::string file = ex.id + ".pgm";
      write_pgm(dir / file, to_gray(ex.image));
      write_pgm(dir / mask_name(file), to_gray(ex.mask));
      manifest << file << ','
               << (ex.target_label ? std::to_string(*ex.target_label) : std::string("-")) << ','
               << ex.protected_label << ',' << split_name(split) << '\n';
    }
  }
  if (!manifest) throw std::runtime_error("failed writing " + (dir / kManifestName).string());
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + ": not a directory");
  Dataset dataset;
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) return dataset;
  std::ifstream manifest(manifest_path);
  if (!manifest) throw FormatError(manifest_path.string() + ": cannot open");

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = manifest_path.string() + ":" + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (line_no == 1) {
      if (fields != std::vector<std::string>{"filename", "target_label", "protected_label", "split"}) {
        throw FormatError(where + ": unexpected header '" + line + "'");
      }
      continue;
    }
    if (fields.size() != 4) {
      throw FormatError(where + ": expected 4 fields, got " + std::to_string(fields.size()));
    }
    const std::string& file = fields[0];
    if (file.size() <= 4 || file.substr(file.size() - 4) != ".pgm" ||
        file.find('/') != std::string::npos) {
      throw FormatError(where + ": bad image filename '" + file + "'");
    }
    const auto split = parse_split(fields[3]);
    if (!split) throw FormatError(where + ": unknown split '" + fields[3] + "'");

    Example ex;
    ex.id = file.substr(0, file.size() - 4);
    if (fields[1] != "-") ex.target_label = parse_label(fields[1], where);
    ex.protected_label = parse_label(fields[2], where);
    try {
      const GrayImage image = read_pgm(dir / file);
      ex.image = image_from_gray(image);
      if (fs::exists(dir / mask_name(file))) {
        ex.mask = plane_from_gray(read_pgm(dir / mask_name(file)));
        for (double& v : ex.mask.mutable_data()) v = v >= 0.5 ? 1.0 : 0.0;
        if (ex.mask.shape() != Shape{image.height, image.width}) {
          throw FormatError(mask_name(file) + ": mask size differs from image");
        }
      } else {
        ex.mask = Tensor({image.height, image.width}, 0.0);
      }
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    dataset.split(*split).push_back(std::move(ex));
  }
  return dataset;
}

}  // namespace agnostic
