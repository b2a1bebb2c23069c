#pragma once

#include <string>

#include "multistop/model.hpp"
#include "multistop/spsa.hpp"
#include "multistop/threshold_policy.hpp"
#include "multistop/value_iteration.hpp"

namespace multistop {

/// Reads the human-editable model format: scalar fields `num_states`,
/// `num_observations`, `discount`, `num_stops`, vector fields
/// `initial_belief`, `reward_mine`, and matrix sections `transition` /
/// `observation` given row by row. Lines starting with '#' are comments.
/// Throws std::runtime_error with the offending field on malformed input.
PomdpModel load_model(const std::string& path);

void save_model(const std::string& path, const PomdpModel& model,
                const std::string& comment = "");

/// Policy files round-trip losslessly (17 significant digits).
LinearThresholdPolicy load_policy(const std::string& path);
void save_policy(const std::string& path, const LinearThresholdPolicy& policy,
                 const std::string& comment = "");

/// Tab-separated value-table export: one row per (grid point, level) with
/// the point coordinates, level, value and action. Consumed by external
/// plotters to draw the mine / don't-mine regions.
void save_value_table(const std::string& path, const ValueTable& table);

/// Tab-separated trace export: iteration, a_n, c_n, estimated J.
void save_trace(const std::string& path, const TrainingTrace& trace);

std::string format_real(double v);  ///< shortest round-trippable decimal

}  // namespace multistop
