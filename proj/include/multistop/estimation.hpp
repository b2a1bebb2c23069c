#pragma once

#include <string>
#include <vector>

#include "multistop/matrix.hpp"
#include "multistop/model.hpp"

namespace multistop {

struct TimeSeriesRecord {
    std::string timestamp;  ///< ISO-8601 date, e.g. 2022-04-01
    double hash_rate = 0.0;
    double difficulty = 0.0;
};

struct RejectedLine {
    int line_number = 0;  ///< 1-based, header is line 1
    std::string reason;
};

struct TimeSeriesDataset {
    std::vector<TimeSeriesRecord> records;  ///< sorted by timestamp
    std::vector<RejectedLine> rejected;
};

/// Parses a comma-separated file with header `timestamp,hash_rate,difficulty`.
/// Rows with unparseable fields are rejected with their line numbers; a
/// missing column set, an empty file, or duplicate timestamps throw
/// std::runtime_error.
TimeSeriesDataset ingest(const std::string& path);

struct BinnedSeries {
    std::vector<int> state_ids;  ///< 1-based bins of hash_rate
    std::vector<int> obs_ids;    ///< 1-based bins of difficulty
    std::vector<double> state_edges;  ///< num_states + 1 ascending edges
    std::vector<double> obs_edges;    ///< num_obs + 1 ascending edges
};

/// Uniform-width bins over [min, max] of each series. A constant series has
/// no usable range and throws std::domain_error.
BinnedSeries bin_series(const TimeSeriesDataset& dataset, int num_states, int num_obs);

struct TransitionEstimate {
    Matrix p;
    std::vector<int> unvisited_states;  ///< 1-based rows that fell back to uniform
};

/// Maximum-likelihood transition matrix from a 1-based state id sequence:
/// P(i,j) = count(i -> j) / count(i -> .). States never left get a uniform
/// row, reported in unvisited_states.
TransitionEstimate estimate_transition_mle(const std::vector<int>& state_ids, int num_states);

struct ObservationEstimate {
    Matrix b;          ///< row-stochastic; TP2 when tp2_ok
    Matrix empirical;  ///< raw conditional frequencies
    bool tp2_ok = false;
    double projection_distance = 0.0;  ///< Frobenius distance moved
};

/// Empirical conditional frequencies B(i,y), projected to a nearby TP2
/// row-stochastic matrix when the frequencies are not already TP2.
ObservationEstimate estimate_observation_tp2(const std::vector<int>& state_ids,
                                             const std::vector<int>& obs_ids, int num_states,
                                             int num_obs);

/// Nearby TP2 row-stochastic matrix: iteratively pulls toward `target` and
/// re-projects by isotonic repair of the log-space column differences
/// followed by row normalization (which preserves TP2). Returns the input
/// unchanged when it is already TP2 and row-stochastic.
Matrix tp2_project(const Matrix& target);

struct EstimationOptions {
    double discount = 0.9;
    int num_stops = 3;
};

struct EstimatedModel {
    PomdpModel model;
    TransitionEstimate transition;
    ObservationEstimate observation;
    BinnedSeries binned;
};

/// Full pipeline on a binned series: MLE transition, TP2-projected
/// observation model, and a mining reward inversely proportional to the
/// bin-center computing power, normalized so r(1) = 1. The initial belief
/// defaults to the highest-power vertex (the conservative start).
EstimatedModel estimate_model(const TimeSeriesDataset& dataset, int num_states, int num_obs,
                              const EstimationOptions& options = {});

}  // namespace multistop
