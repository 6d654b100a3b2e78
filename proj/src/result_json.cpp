#include <json.hpp>

#include "scenelogic/inference.hpp"

namespace scenelogic {

using ordered_json = nlohmann::ordered_json;

std::string result_to_json(const ConfigurationResult& result) {
  ordered_json cells = ordered_json::array();
  for (const auto& c : result.cells) cells.push_back({{"x", c.cell.x}, {"y", c.cell.y}, {"p", c.prob}});
  ordered_json per_scale = ordered_json::object();
  for (const auto& [scale, p] : result.per_scale) per_scale[std::to_string(scale)] = p;
  ordered_json doc;
  doc["query"] = result.query;
  doc["prob"] = result.prob;
  doc["sigma"] = result.scale;
  doc["cells"] = std::move(cells);
  doc["per_scale"] = std::move(per_scale);
  doc["truncated"] = result.truncated;
  return doc.dump(2);
}

ConfigurationResult result_from_json(std::string_view text) {
  ConfigurationResult r;
  try {
    auto doc = ordered_json::parse(text);
    r.query = doc.at("query").get<std::string>();
    r.prob = doc.at("prob").get<double>();
    r.scale = doc.at("sigma").get<int>();
    for (const auto& c : doc.at("cells")) r.cells.push_back({{c.at("x").get<int>(), c.at("y").get<int>()}, c.at("p").get<double>()});
    for (const auto& [key, p] : doc.at("per_scale").items()) r.per_scale[std::stoi(key)] = p.get<double>();
    r.truncated = doc.at("truncated").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed result: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ValidationError(std::string("malformed result: ") + e.what());
  }
  return r;
}

}  // namespace scenelogic
