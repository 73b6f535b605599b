#include "thor/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thor/error.hpp"

namespace thor {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(std::size_t line, const std::string& why) {
  throw Error(Errc::BadRecord, "line " + std::to_string(line) + ": " + why);
}

std::string required_text(const json& obj, const char* field, std::size_t line) {
  if (!obj.contains(field) || !obj[field].is_string()) {
    bad(line, std::string("\"") + field + "\" must be a string");
  }
  std::string value = obj[field].get<std::string>();
  if (value.find_first_not_of(" \t\r\n") == std::string::npos) {
    bad(line, std::string("\"") + field + "\" is empty");
  }
  return value;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::Io, "short write to " + path.string());
}

Dataset parse_dataset(std::string_view jsonl, std::string name) {
  Dataset dataset;
  dataset.name = std::move(name);
  std::set<std::string, std::less<>> ids;
  std::istringstream in{std::string(jsonl)};
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      bad(line, e.what());
    }
    if (!obj.is_object()) bad(line, "expected a JSON object");

    Instance inst;
    inst.id = required_text(obj, "id", line);
    inst.sentence = required_text(obj, "sentence", line);
    inst.target = required_text(obj, "target", line);
    if (!obj.contains("polarity") || !obj["polarity"].is_string()) bad(line, "\"polarity\" must be a string");
    auto label = obj["polarity"].get<std::string>();
    auto polarity = parse_polarity(label);
    if (!polarity) bad(line, "unknown polarity \"" + label + "\"");
    inst.gold = *polarity;
    if (!obj.contains("implicit") || !obj["implicit"].is_boolean()) bad(line, "\"implicit\" must be a boolean");
    inst.implicit = obj["implicit"].get<bool>();

    if (!ids.insert(inst.id).second) {
      throw Error(Errc::DuplicateId, "line " + std::to_string(line) + ": id \"" + inst.id + "\" repeats");
    }
    dataset.instances.push_back(std::move(inst));
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path), path.stem().string());
}

std::string format_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& inst : dataset.instances) {
    ordered_json obj;
    obj["id"] = inst.id;
    obj["sentence"] = inst.sentence;
    obj["target"] = inst.target;
    obj["polarity"] = to_string(inst.gold);
    obj["implicit"] = inst.implicit;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file(path, format_dataset(dataset));
}

}  // namespace thor
