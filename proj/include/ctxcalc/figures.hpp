#pragma once

/// \file ctxcalc/figures.hpp
///
/// Bundled figure scenarios. Kept byte-identical to
/// scenarios/figure1_rci_vs_memory.yaml and scenarios/figure2_rci_vs_noise.yaml
/// (checked by the test suite).

#include <array>
#include <string_view>

namespace ctxcalc {

struct bundled_figure
{
    std::string_view name;
    std::string_view title;
    std::string_view scenario_text;
};

inline constexpr std::string_view figure1_scenario = R"yaml(# RCI against memory window, noise-to-total ratio 0.5.
# Two topics with lambda_total = 1 each, rho = 0.3.
schema: 1
topics:
  - {lambda_correct: 0.5, lambda_noise: 0.5}
  - {lambda_correct: 0.5, lambda_noise: 0.5}
correlations:
  - [0, 0.3]
  - [0.3, 0]
shared_window: 2
alpha: 1
beta: 0.5
n_agents: 2
sweep:
  parameter: memory_window
  start: 0.25
  stop: 10
  step: 0.25
  outputs: [rci_shared, rci_separate]
  chart: true
)yaml";

inline constexpr std::string_view figure2_scenario = R"yaml(# RCI against noise-to-total ratio, memory window M = 2.
# Two topics with lambda_total = 1 each, rho = 0.3.
schema: 1
topics:
  - {lambda_correct: 0.5, lambda_noise: 0.5}
  - {lambda_correct: 0.5, lambda_noise: 0.5}
correlations:
  - [0, 0.3]
  - [0.3, 0]
shared_window: 2
alpha: 1
beta: 0.5
n_agents: 2
sweep:
  parameter: noise_ratio
  start: 0
  stop: 1
  step: 0.05
  outputs: [rci_shared, rci_separate]
  chart: true
)yaml";

inline constexpr std::array<bundled_figure, 2> bundled_figures = {{
    {"figure1_rci_vs_memory", "RCI vs memory window (noise ratio 0.5)", figure1_scenario},
    {"figure2_rci_vs_noise", "RCI vs noise-to-total ratio (M = 2)", figure2_scenario},
}};

} // namespace ctxcalc
