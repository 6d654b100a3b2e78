#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scenelogic/compile.hpp"
#include "scenelogic/grounding.hpp"
#include "scenelogic/inference.hpp"
#include "scenelogic/scenegen.hpp"

namespace scenelogic {

std::string_view default_prelude();

/// Prelude rules followed by the rules and queries of `query_text`.
Program load_program(std::string_view query_text, std::string_view prelude_text = default_prelude());

/// Compiles `name`, or the first query of the file when empty.
CompiledQuery load_query(const std::filesystem::path& query_file, const std::optional<std::filesystem::path>& prelude,
                         const std::string& name = {});

struct EngineParams {
  GroundingParams grounding;
  Aggregator agg;
  std::size_t proof_cap = kDefaultProofCap;

  void validate() const;
};

struct EvalMode {
  enum class Kind { object_only, segment_only, product, conj_no_spatial, spatial_fixed, spatial_multiscale };

  Kind kind = Kind::spatial_multiscale;
  int scale = 1;  // spatial_fixed only

  std::string name() const;  // "spatial-fixed:4" for fixed scales

  friend bool operator==(const EvalMode&, const EvalMode&) = default;
};

/// Accepts the names above; the fixed scale may be written spatial-fixed:4 or
/// spatial-fixed(4). Bare "spatial-fixed" uses `default_scale`.
EvalMode parse_eval_mode(std::string_view text, int default_scale = 1);

/// The six ablation modes in report order.
std::vector<EvalMode> all_eval_modes(int fixed_scale = 1);

/// Throws ValidationError for a fixed scale outside the configured set.
void check_mode(const EvalMode& mode, const EngineParams& params);

/// First object and segment symbols of the query, when present.
std::optional<std::string> query_object_symbol(const CompiledQuery& query);
std::optional<std::string> query_segment_symbol(const CompiledQuery& query);

/// Score in [0,1]; missing symbols contribute 0.
double score_bundle(const Bundle& bundle, const CompiledQuery& query, const EvalMode& mode,
                    const EngineParams& params);

/// Same, reusing a pyramid built with params.grounding.
double score_pyramid(const Bundle& bundle, const Pyramid& pyramid, const CompiledQuery& query, const EvalMode& mode,
                     const EngineParams& params);

/// Configuration result for the spatial modes and conj-no-spatial; the
/// single-symbol baselines have no configuration and raise ValidationError.
ConfigurationResult infer_bundle(const Bundle& bundle, const CompiledQuery& query, const EvalMode& mode,
                                 const EngineParams& params);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<std::pair<double, bool>> sorted;  // descending score
  std::vector<RocPoint> points;                 // from (0,0) to (1,1)
  double auc = 0.0;
};

/// Threshold sweep over distinct scores, ties as one step, trapezoid AUC.
/// Throws ValidationError unless both classes are present.
RocResult roc_auc(std::span<const double> scores, std::span<const bool> labels);

/// Binary PGM (P5), pixel = round(255·v).
std::vector<std::uint8_t> render_pgm(const SymbolHeatmap& map);

/// Configuration map at image resolution: each grid cell's probability
/// painted over its σ×σ pixel block.
SymbolHeatmap configuration_map(const ConfigurationResult& result, std::uint32_t height, std::uint32_t width);

struct ModeReport {
  EvalMode mode;
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::vector<double> scores;  // index order
};

struct EvalReport {
  std::vector<IndexEntry> items;
  std::vector<ModeReport> modes;
};

/// Scores every item of the index under every mode. Bundles resolve relative
/// to the index file's directory.
EvalReport evaluate_dataset(const std::filesystem::path& index_file, const CompiledQuery& query,
                            std::span<const EvalMode> modes, const EngineParams& params);

std::string metrics_csv(const EvalReport& report);  // mode,auc,n_pos,n_neg
std::string scores_csv(const EvalReport& report);   // file,label,<mode>...

}  // namespace scenelogic
