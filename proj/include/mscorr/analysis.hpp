#pragma once

#include <vector>

#include "mscorr/association.hpp"
#include "mscorr/crosscorr.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/scaling.hpp"

namespace mscorr {

/// Estimation settings shared by the pipeline and the synthetic experiments.
struct AnalysisSettings {
  std::vector<double> q_grid = default_q_grid();
  std::vector<int> tau_range = default_tau_range();
  double alpha = kDefaultAlpha;
  SignificanceMode significance_mode = SignificanceMode::kFiltered;
  unsigned threads = 0;
};

struct AnalysisResult {
  ScalingTable scaling;
  CorrelationSummary correlation;
  AssociationReport report;
};

/// Scaling proxies, correlation summary and association report of one panel.
inline AnalysisResult analyze(const ReturnPanel& panel, const CapitalizationTable& caps,
                              const AnalysisSettings& settings) {
  AnalysisResult r;
  r.scaling = estimate_panel_scaling(panel, settings.q_grid, settings.tau_range, settings.threads);
  r.correlation =
      correlation_matrix(panel, settings.alpha, settings.significance_mode, settings.threads);
  r.report = build_report(r.scaling, r.correlation, caps);
  return r;
}

}  // namespace mscorr
