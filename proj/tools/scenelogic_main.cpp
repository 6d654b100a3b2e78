// scenelogic: command-line front end.
//
//   scenelogic infer    --query q.sl --bundle manifest.json [--render dir]
//   scenelogic eval     --query q.sl --dataset dir [--mode m1,m2] --out dir
//   scenelogic synth    --pos 20 --hard-neg 20 --seed 7 --out dir
//   scenelogic render   --bundle manifest.json --out dir
//   scenelogic validate [--query q.sl] [--bundle manifest.json] [--dataset dir]
//
// Exit status: 0 ok, 1 validation error, 2 I/O error.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scenelogic/errors.hpp"
#include "scenelogic/harness.hpp"
#include "scenelogic/parser.hpp"
#include "scenelogic/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scenelogic;

namespace {

struct Settings {
  std::string query, prelude, query_name, bundle, dataset, out, render, config;
  std::string scales = "1,2,4,8,16";
  std::string pooling = "max";
  int k = 3;
  double epsilon = 0.05;
  int max_facts = 64;
  std::string agg = "topk";
  std::vector<std::string> modes;
  int fixed_scale = 1;
  std::size_t proof_cap = kDefaultProofCap;
  std::uint64_t seed = 0;

  // synth
  int pos = 0, hard_neg = 0, tool_only = 0, floor_only = 0, neither = 0, pipe_pos = 0, pipe_far = 0;
  std::uint32_t height = 224, width = 224;
  int blob_min = 8, blob_max = 96;
  double noise = 0.1;
};

// Options that may also come from the --config JSON file; the key is the
// flag name with dashes turned into underscores.
struct Binding {
  CLI::Option* option;
  std::string key;
  std::function<void(const json&)> apply;
};

class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& help) : sub_(app.add_subcommand(name, help)) {}

  template <class T>
  CLI::Option* bind(const std::string& flag, T& target, const std::string& help) {
    auto* opt = sub_->add_option("--" + flag, target, help);
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    bindings_.push_back({opt, key, [&target](const json& j) { target = j.get<T>(); }});
    return opt;
  }

  CLI::Option* bind_csv(const std::string& flag, std::string& target, const std::string& help) {
    auto* opt = sub_->add_option("--" + flag, target, help);
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    bindings_.push_back({opt, key, [&target](const json& j) {
                           if (!j.is_array()) {
                             target = j.get<std::string>();
                             return;
                           }
                           std::string s;
                           for (const auto& v : j) s += (s.empty() ? "" : ",") + std::to_string(v.get<int>());
                           target = s;
                         }});
    return opt;
  }

  CLI::Option* bind_list(const std::string& flag, std::vector<std::string>& target, const std::string& help) {
    auto* opt = sub_->add_option("--" + flag, target, help)->delimiter(',');
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    bindings_.push_back({opt, key, [&target](const json& j) {
                           target = j.is_array() ? j.get<std::vector<std::string>>()
                                                 : std::vector<std::string>{j.get<std::string>()};
                         }});
    return opt;
  }

  void apply_config(const std::string& path) const {
    if (path.empty()) return;
    json doc;
    try {
      doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw ValidationError(path + ": malformed config: " + e.what());
    }
    if (!doc.is_object()) throw ValidationError(path + ": config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.key == key; });
      if (it == bindings_.end()) throw ValidationError(path + ": unknown config key '" + key + "'");
      if (it->option->count() > 0) continue;  // flags win
      try {
        it->apply(value);
      } catch (const json::exception& e) {
        throw ValidationError(path + ": bad value for '" + key + "': " + e.what());
      }
    }
  }

  CLI::App* operator->() const { return sub_; }
  bool parsed() const { return sub_->parsed(); }

 private:
  CLI::App* sub_;
  std::vector<Binding> bindings_;
};

std::vector<int> parse_scales(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw ValidationError("bad scale list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

Aggregator parse_agg(const std::string& name, int k) {
  if (name == "max") return Aggregator::max();
  if (name == "topk") return Aggregator::top_k(k);
  if (name == "exact") return Aggregator::exact();
  throw ValidationError("aggregator must be max, topk or exact, got '" + name + "'");
}

EngineParams engine_params(const Settings& s) {
  EngineParams p;
  p.grounding.scales = parse_scales(s.scales);
  p.grounding.pooling = parse_pooling(s.pooling);
  p.grounding.epsilon = s.epsilon;
  p.grounding.max_facts = s.max_facts;
  p.agg = parse_agg(s.agg, s.k);
  p.proof_cap = s.proof_cap;
  p.validate();
  return p;
}

CompiledQuery query_from(const Settings& s) {
  if (s.query.empty()) throw ValidationError("--query is required");
  std::optional<fs::path> prelude;
  if (!s.prelude.empty()) prelude = s.prelude;
  return load_query(s.query, prelude, s.query_name);
}

fs::path index_path(const std::string& dataset) {
  fs::path p = dataset;
  return fs::is_directory(p) ? p / "index.jsonl" : p;
}

void write_pgm(const fs::path& path, const SymbolHeatmap& map) {
  auto bytes = render_pgm(map);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string pgm_name(const std::string& symbol) {
  std::string out;
  for (char c : symbol) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out + ".pgm";
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void render_bundle(const Bundle& bundle, const fs::path& dir) {
  make_dir(dir);
  for (const auto& h : bundle.heatmaps) write_pgm(dir / pgm_name(h.symbol), h);
}

int run_infer(const Settings& s) {
  EngineParams params = engine_params(s);
  CompiledQuery query = query_from(s);
  if (s.bundle.empty()) throw ValidationError("--bundle is required");
  Bundle bundle = read_bundle(s.bundle);

  EvalMode mode = s.modes.empty() ? EvalMode{} : parse_eval_mode(s.modes.front(), s.fixed_scale);
  ConfigurationResult result = infer_bundle(bundle, query, mode, params);

  std::string text = result_to_json(result) + "\n";
  if (s.out.empty() || s.out == "-")
    std::cout << text;
  else
    write_text_file(s.out, text);

  if (!s.render.empty()) {
    render_bundle(bundle, s.render);
    write_pgm(fs::path(s.render) / "config.pgm", configuration_map(result, bundle.height(), bundle.width()));
  }
  return 0;
}

int run_eval(const Settings& s) {
  EngineParams params = engine_params(s);
  CompiledQuery query = query_from(s);
  if (s.dataset.empty()) throw ValidationError("--dataset is required");
  std::vector<EvalMode> modes;
  if (s.modes.empty())
    modes = all_eval_modes(s.fixed_scale);
  else
    for (const auto& m : s.modes) modes.push_back(parse_eval_mode(m, s.fixed_scale));

  EvalReport report = evaluate_dataset(index_path(s.dataset), query, modes, params);
  std::string metrics = metrics_csv(report);
  fs::path out = s.out.empty() ? fs::path(".") : fs::path(s.out);
  make_dir(out);
  write_text_file(out / "metrics.csv", metrics);
  write_text_file(out / "scores.csv", scores_csv(report));
  std::cout << metrics;
  return 0;
}

int run_synth(const Settings& s) {
  if (s.out.empty()) throw ValidationError("--out is required");
  DatasetConfig config;
  config.base_seed = s.seed;
  config.counts = {
      {Layout::tool_on_floor_positive, s.pos}, {Layout::tool_not_on_floor, s.hard_neg},
      {Layout::tool_only, s.tool_only},        {Layout::floor_only, s.floor_only},
      {Layout::neither, s.neither},            {Layout::pipe_leak_positive, s.pipe_pos},
      {Layout::pipe_leak_far, s.pipe_far},
  };
  config.scene.height = s.height;
  config.scene.width = s.width;
  config.scene.blob_min = s.blob_min;
  config.scene.blob_max = s.blob_max;
  config.scene.noise = s.noise;
  auto index = gen_dataset(config, s.out);
  std::cout << index.size() << " scenes written to " << s.out << "\n";
  return 0;
}

int run_render(const Settings& s) {
  if (s.bundle.empty()) throw ValidationError("--bundle is required");
  if (s.out.empty()) throw ValidationError("--out is required");
  render_bundle(read_bundle(s.bundle), s.out);
  return 0;
}

int run_validate(const Settings& s) {
  if (s.query.empty() && s.bundle.empty() && s.dataset.empty())
    throw ValidationError("nothing to validate: pass --query, --bundle or --dataset");
  int status = 0;
  if (!s.query.empty()) {
    std::string prelude = s.prelude.empty() ? std::string(default_prelude()) : read_text_file(s.prelude);
    Program program = load_program(read_text_file(s.query), prelude);
    auto report = validate(program);
    if (report.empty()) {
      for (const auto& q : program.queries) compile_query(program, q.name);
      std::cout << s.query << ": ok (" << program.queries.size() << " queries)\n";
    } else {
      std::cerr << s.query << ":\n" << format_report(report);
      status = 1;
    }
  }
  if (!s.bundle.empty()) {
    Bundle b = read_bundle(s.bundle);
    std::cout << s.bundle << ": ok (" << b.heatmaps.size() << " symbols, " << b.height() << "x" << b.width() << ")\n";
  }
  if (!s.dataset.empty()) {
    fs::path index = index_path(s.dataset);
    auto items = read_index(index);
    for (const auto& item : items) read_bundle(index.parent_path() / item.file);
    std::cout << index.string() << ": ok (" << items.size() << " scenes)\n";
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Spatial configuration queries over probabilistic symbol heatmaps"};
  app.require_subcommand(1);

  auto add_engine = [&](Command& c) {
    c.bind("query", s.query, "query file (.sl)");
    c.bind("prelude", s.prelude, "rule file loaded before the query (default: built-in prelude)");
    c.bind("query-name", s.query_name, "query to run (default: first in file)");
    c.bind_csv("scales", s.scales, "comma-separated scale set");
    c.bind("pooling", s.pooling, "max or mean");
    c.bind("k", s.k, "proofs combined by top-k noisy-or");
    c.bind("epsilon", s.epsilon, "fact threshold");
    c.bind("max-facts", s.max_facts, "facts kept per symbol and scale");
    c.bind("agg", s.agg, "max, topk or exact");
    c.bind("fixed-scale", s.fixed_scale, "scale used by spatial-fixed");
    c.bind("proof-cap", s.proof_cap, "proofs kept per scale");
    c->add_option("--config", s.config, "JSON file with default values for these flags");
  };

  Command infer(app, "infer", "run a query on one bundle");
  add_engine(infer);
  infer.bind("bundle", s.bundle, "bundle manifest");
  infer.bind_list("mode", s.modes, "spatial-multiscale (default), spatial-fixed:N or conj-no-spatial");
  infer.bind("out", s.out, "result JSON path (default: stdout)");
  infer.bind("render", s.render, "directory for PGM renders");

  Command eval(app, "eval", "score a labeled dataset under the ablation modes");
  add_engine(eval);
  eval.bind("dataset", s.dataset, "dataset directory or index.jsonl");
  eval.bind_list("mode", s.modes, "modes to run (default: all six)");
  eval.bind("out", s.out, "directory for metrics.csv and scores.csv");

  Command synth(app, "synth", "generate a synthetic dataset");
  synth.bind("pos", s.pos, "tool-on-floor positives");
  synth.bind("hard-neg", s.hard_neg, "tool-not-on-floor hard negatives");
  synth.bind("tool-only", s.tool_only, "scenes without a floor");
  synth.bind("floor-only", s.floor_only, "scenes without a tool");
  synth.bind("neither", s.neither, "noise-only scenes");
  synth.bind("pipe-pos", s.pipe_pos, "pipe with adjacent leakage");
  synth.bind("pipe-far", s.pipe_far, "pipe with distant leakage");
  synth.bind("seed", s.seed, "base seed; item i uses seed + i");
  synth.bind("height", s.height, "image height");
  synth.bind("width", s.width, "image width");
  synth.bind("blob-min", s.blob_min, "smallest object diameter, pixels");
  synth.bind("blob-max", s.blob_max, "largest object diameter, pixels");
  synth.bind("noise", s.noise, "noise amplitude");
  synth.bind("out", s.out, "output directory");
  synth->add_option("--config", s.config, "JSON file with default values for these flags");

  Command render(app, "render", "write every symbol of a bundle as PGM");
  render.bind("bundle", s.bundle, "bundle manifest");
  render.bind("out", s.out, "output directory");

  Command check(app, "validate", "check a query file, a bundle or a dataset");
  check.bind("query", s.query, "query file (.sl)");
  check.bind("prelude", s.prelude, "rule file loaded before the query");
  check.bind("bundle", s.bundle, "bundle manifest");
  check.bind("dataset", s.dataset, "dataset directory or index.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (Command* c : {&infer, &eval, &synth}) {
      if (!c->parsed()) continue;
      c->apply_config(s.config);
    }
    if (infer.parsed()) return run_infer(s);
    if (eval.parsed()) return run_eval(s);
    if (synth.parsed()) return run_synth(s);
    if (render.parsed()) return run_render(s);
    if (check.parsed()) return run_validate(s);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
