#include "cli_config.hpp"

#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kframes::cli {

namespace {

std::string scalar_text(const nlohmann::json& v, const std::string& name) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw CLI::ConversionError("config value for '" + name + "' must be a scalar or an array of scalars");
}

void flatten(const nlohmann::json& j, const std::string& name, const std::vector<std::string>& parents,
             std::vector<CLI::ConfigItem>& out) {
  if (j.is_object()) {
    auto path = parents;
    if (!name.empty()) path.push_back(name);
    for (auto it = j.begin(); it != j.end(); ++it) flatten(*it, it.key(), path, out);
    return;
  }
  if (name.empty()) throw CLI::ConversionError("JSON config must be an object");
  CLI::ConfigItem item;
  item.name = name;
  item.parents = parents;
  if (j.is_array()) {
    for (const auto& v : j) item.inputs.push_back(scalar_text(v, name));
  } else {
    item.inputs.push_back(scalar_text(j, name));
  }
  out.push_back(std::move(item));
}

class JsonOrTomlConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::stringstream buffer;
    buffer << input.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw CLI::ConversionError(std::string("invalid JSON config: ") + e.what());
      }
      std::vector<CLI::ConfigItem> items;
      flatten(j, "", {}, items);
      return items;
    }
    std::istringstream again(text);
    return CLI::ConfigTOML::from_config(again);
  }
};

}  // namespace

std::shared_ptr<CLI::Config> make_config_formatter() { return std::make_shared<JsonOrTomlConfig>(); }

}  // namespace kframes::cli
