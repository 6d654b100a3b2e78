#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "scenelogic/errors.hpp"
#include "scenelogic/harness.hpp"
#include "scenelogic/parser.hpp"
#include "scenelogic/validate.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace scenelogic;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

SymbolKind parse_kind(const std::string& kind) {
  if (kind == "object") return SymbolKind::object;
  if (kind == "segment") return SymbolKind::segment;
  throw ValidationError("kind must be object or segment, got '" + kind + "'");
}

const char* kind_name(SymbolKind k) { return k == SymbolKind::object ? "object" : "segment"; }

Array to_array(const SymbolHeatmap& h) {
  Array a({py::ssize_t(h.height), py::ssize_t(h.width)});
  std::copy(h.values.begin(), h.values.end(), a.mutable_data());
  return a;
}

SymbolHeatmap from_array(const std::string& symbol, SymbolKind kind, const Array& a) {
  if (a.ndim() != 2) throw ValidationError("heatmap must be a 2-D array");
  std::vector<float> v(a.data(), a.data() + a.size());
  return make_heatmap(symbol, kind, std::uint32_t(a.shape(0)), std::uint32_t(a.shape(1)), std::move(v));
}

std::string prelude_or_default(const std::optional<std::string>& prelude) {
  return prelude ? *prelude : std::string(default_prelude());
}

CompiledQuery compile_text(const std::string& text, const std::string& name, const std::optional<std::string>& prelude) {
  Program program = load_program(text, prelude_or_default(prelude));
  if (auto report = validate(program); !report.empty()) throw ValidationError(format_report(report));
  Program user = parse_program(text);
  if (name.empty() && user.queries.empty()) throw ValidationError("no query defined");
  return compile_query(program, name.empty() ? user.queries.front().name : name);
}

EngineParams engine(const std::vector<int>& scales, const std::string& pooling, double epsilon, int max_facts,
                    const std::string& agg, int k, std::size_t proof_cap) {
  EngineParams p;
  p.grounding.scales = scales;
  p.grounding.pooling = parse_pooling(pooling);
  p.grounding.epsilon = epsilon;
  p.grounding.max_facts = max_facts;
  if (agg == "max")
    p.agg = Aggregator::max();
  else if (agg == "topk")
    p.agg = Aggregator::top_k(k);
  else if (agg == "exact")
    p.agg = Aggregator::exact();
  else
    throw ValidationError("agg must be max, topk or exact");
  p.proof_cap = proof_cap;
  p.validate();
  return p;
}

py::dict result_dict(const ConfigurationResult& r) {
  py::list cells;
  for (const auto& c : r.cells) cells.append(py::make_tuple(c.cell.x, c.cell.y, c.prob));
  return py::dict("query"_a = r.query, "prob"_a = r.prob, "sigma"_a = r.scale, "cells"_a = cells,
                  "per_scale"_a = r.per_scale, "truncated"_a = r.truncated);
}

py::dict index_dict(const IndexEntry& e) {
  return py::dict("file"_a = e.file, "layout"_a = std::string(to_string(e.layout)),
                  "label"_a = std::string(to_string(e.label)), "seed"_a = e.seed);
}

// Engine keyword arguments shared by infer, score and evaluate.
#define SCENELOGIC_ENGINE_ARGS                                                                                    \
  py::kw_only(), "scales"_a = std::vector<int>{1, 2, 4, 8, 16}, "pooling"_a = "max", "epsilon"_a = 0.05,         \
      "max_facts"_a = 64, "agg"_a = "topk", "k"_a = 3, "proof_cap"_a = kDefaultProofCap

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spatial configuration queries over probabilistic symbol heatmaps";

  // later registrations are tried first, so subclasses come last
  auto& validation_error = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<FormatError>(m, "FormatError", validation_error.ptr());
  py::register_exception<OracleLimitError>(m, "OracleLimitError", validation_error.ptr());

  py::class_<CompiledQuery>(m, "Query")
      .def_readonly("name", &CompiledQuery::name)
      .def_readonly("subject", &CompiledQuery::subject)
      .def_property_readonly("required_symbols", &CompiledQuery::required_symbols)
      .def_property_readonly("branches", [](const CompiledQuery& q) { return q.branches.size(); })
      .def("__repr__", [](const CompiledQuery& q) { return "<Query " + q.name + ">"; });

  m.def("compile_query", &compile_text, "text"_a, "name"_a = "", "prelude"_a = py::none(),
        "Compile a query from source text; the default prelude is loaded first.");
  m.def(
      "load_query",
      [](const std::filesystem::path& path, const std::string& name, std::optional<std::filesystem::path> prelude) {
        return load_query(path, prelude, name);
      },
      "path"_a, "name"_a = "", "prelude"_a = py::none());
  m.def(
      "validate_program",
      [](const std::string& text, const std::optional<std::string>& prelude) {
        py::list out;
        for (const auto& v : validate(load_program(text, prelude_or_default(prelude))))
          out.append(py::dict("kind"_a = v.kind, "message"_a = v.message, "line"_a = v.pos.line,
                              "column"_a = v.pos.column));
        return out;
      },
      "text"_a, "prelude"_a = py::none(), "Violations as dicts; empty when the program compiles.");
  m.def("default_prelude", [] { return std::string(default_prelude()); });

  py::class_<Bundle>(m, "Bundle")
      .def(py::init([](std::string image_id) { return Bundle{std::move(image_id), {}}; }), "image_id"_a = "")
      .def_readwrite("image_id", &Bundle::image_id)
      .def_property_readonly("height", &Bundle::height)
      .def_property_readonly("width", &Bundle::width)
      .def_property_readonly("symbols",
                             [](const Bundle& b) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& h : b.heatmaps) out.emplace_back(h.symbol, kind_name(h.kind));
                               return out;
                             })
      .def(
          "add",
          [](Bundle& b, const std::string& symbol, const std::string& kind, const Array& values) {
            Bundle next = b;
            next.heatmaps.push_back(from_array(symbol, parse_kind(kind), values));
            next.validate();
            b = std::move(next);
          },
          "symbol"_a, "kind"_a, "values"_a, "Append a validated heatmap.")
      .def("__getitem__",
           [](const Bundle& b, const std::string& symbol) {
             const SymbolHeatmap* h = b.find(symbol);
             if (!h) throw py::key_error(symbol);
             return to_array(*h);
           })
      .def("__contains__", [](const Bundle& b, const std::string& symbol) { return b.find(symbol) != nullptr; })
      .def("__len__", [](const Bundle& b) { return b.heatmaps.size(); })
      .def("validate", &Bundle::validate);

  m.def("read_bundle", &read_bundle, "manifest"_a);
  m.def(
      "write_bundle",
      [](const Bundle& b, const std::filesystem::path& dir) { return write_bundle(b, dir).string(); }, "bundle"_a,
      "dir"_a);
  m.def(
      "read_heatmap",
      [](const py::bytes& data) {
        std::string s = data;
        return to_array(read_heatmap({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}));
      },
      "data"_a, "Decode SYMH bytes into a float32 array.");
  m.def(
      "write_heatmap",
      [](const Array& values) {
        auto bytes = write_heatmap(from_array("", SymbolKind::object, values));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      "values"_a);

  m.def(
      "infer",
      [](const CompiledQuery& q, const Bundle& b, const std::string& mode, const std::vector<int>& scales,
         const std::string& pooling, double epsilon, int max_facts, const std::string& agg, int k,
         std::size_t proof_cap) {
        auto p = engine(scales, pooling, epsilon, max_facts, agg, k, proof_cap);
        return result_dict(infer_bundle(b, q, parse_eval_mode(mode), p));
      },
      "query"_a, "bundle"_a, "mode"_a = "spatial-multiscale", SCENELOGIC_ENGINE_ARGS);
  m.def(
      "score",
      [](const CompiledQuery& q, const Bundle& b, const std::string& mode, const std::vector<int>& scales,
         const std::string& pooling, double epsilon, int max_facts, const std::string& agg, int k,
         std::size_t proof_cap) {
        auto p = engine(scales, pooling, epsilon, max_facts, agg, k, proof_cap);
        return score_bundle(b, q, parse_eval_mode(mode), p);
      },
      "query"_a, "bundle"_a, "mode"_a = "spatial-multiscale", SCENELOGIC_ENGINE_ARGS);
  m.def(
      "evaluate",
      [](const std::filesystem::path& index, const CompiledQuery& q, std::optional<std::vector<std::string>> modes,
         const std::vector<int>& scales, const std::string& pooling, double epsilon, int max_facts,
         const std::string& agg, int k, std::size_t proof_cap) {
        auto p = engine(scales, pooling, epsilon, max_facts, agg, k, proof_cap);
        std::vector<EvalMode> ms;
        if (modes)
          for (const auto& name : *modes) ms.push_back(parse_eval_mode(name));
        else
          ms = all_eval_modes();
        auto path = std::filesystem::is_directory(index) ? index / "index.jsonl" : index;
        EvalReport rep;
        {
          py::gil_scoped_release release;
          rep = evaluate_dataset(path, q, ms, p);
        }
        py::dict auc;
        for (const auto& mr : rep.modes) auc[py::str(mr.mode.name())] = mr.auc;
        return py::dict("auc"_a = auc, "metrics_csv"_a = metrics_csv(rep), "scores_csv"_a = scores_csv(rep));
      },
      "index"_a, "query"_a, "modes"_a = py::none(), SCENELOGIC_ENGINE_ARGS);

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        std::unique_ptr<bool[]> y(new bool[labels.size()]);
        std::copy(labels.begin(), labels.end(), y.get());
        return roc_auc(scores, std::span<const bool>(y.get(), labels.size())).auc;
      },
      "scores"_a, "labels"_a);

  m.def(
      "gen_scene",
      [](const std::string& layout, std::uint64_t seed, std::uint32_t height, std::uint32_t width, double noise,
         int blob_min, int blob_max, const std::string& variant, bool cabinet) {
        SceneSpec s;
        s.layout = parse_layout(layout);
        s.seed = seed;
        s.height = height;
        s.width = width;
        s.noise = noise;
        s.blob_min = blob_min;
        s.blob_max = blob_max;
        if (variant == "floor-above")
          s.variant = NegativeVariant::floor_above;
        else if (variant == "cabinet-between")
          s.variant = NegativeVariant::cabinet_between;
        else if (variant != "any")
          throw ValidationError("variant must be any, floor-above or cabinet-between");
        s.cabinet = cabinet;
        auto scene = gen_scene(s);
        return py::make_tuple(std::move(scene.bundle), std::string(to_string(scene.label)));
      },
      "layout"_a, "seed"_a = 0, py::kw_only(), "height"_a = 224, "width"_a = 224, "noise"_a = 0.1, "blob_min"_a = 8,
      "blob_max"_a = 96, "variant"_a = "any", "cabinet"_a = true, "Returns (bundle, label).");
  m.def(
      "gen_dataset",
      [](const std::filesystem::path& dir, const std::map<std::string, int>& counts, std::uint64_t seed,
         std::uint32_t height, std::uint32_t width, double noise, int blob_min, int blob_max) {
        DatasetConfig cfg;
        for (const auto& [layout, n] : counts) cfg.counts[parse_layout(layout)] = n;
        cfg.base_seed = seed;
        cfg.scene.height = height;
        cfg.scene.width = width;
        cfg.scene.noise = noise;
        cfg.scene.blob_min = blob_min;
        cfg.scene.blob_max = blob_max;
        py::list out;
        for (const auto& e : gen_dataset(cfg, dir)) out.append(index_dict(e));
        return out;
      },
      "dir"_a, "counts"_a, "seed"_a = 0, py::kw_only(), "height"_a = 224, "width"_a = 224, "noise"_a = 0.1,
      "blob_min"_a = 8, "blob_max"_a = 96);
}
