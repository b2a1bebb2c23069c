#include "multistop/estimation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace multistop {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool parse_real(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

TimeSeriesDataset ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ingest: empty file " + path);

    auto header = split_csv(trim(line));
    for (auto& h : header) h = trim(h);
    if (header.size() < 3 || header[0] != "timestamp" || header[1] != "hash_rate" ||
        header[2] != "difficulty")
        throw std::runtime_error("ingest: expected header timestamp,hash_rate,difficulty");

    TimeSeriesDataset out;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        std::string t = trim(line);
        if (t.empty()) continue;
        auto fields = split_csv(t);
        if (fields.size() != 3) {
            out.rejected.push_back({line_number, "expected 3 fields"});
            continue;
        }
        TimeSeriesRecord rec;
        rec.timestamp = trim(fields[0]);
        if (rec.timestamp.empty()) {
            out.rejected.push_back({line_number, "missing timestamp"});
            continue;
        }
        if (!parse_real(trim(fields[1]), rec.hash_rate) || rec.hash_rate < 0.0) {
            out.rejected.push_back({line_number, "bad hash_rate"});
            continue;
        }
        if (!parse_real(trim(fields[2]), rec.difficulty) || rec.difficulty < 0.0) {
            out.rejected.push_back({line_number, "bad difficulty"});
            continue;
        }
        out.records.push_back(std::move(rec));
    }
    if (out.records.empty()) throw std::runtime_error("ingest: no valid records in " + path);

    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 0; i + 1 < out.records.size(); ++i)
        if (out.records[i].timestamp == out.records[i + 1].timestamp)
            throw std::runtime_error("ingest: duplicate timestamp " + out.records[i].timestamp);
    return out;
}

namespace {

std::vector<int> uniform_bin(const std::vector<double>& values, int bins,
                             std::vector<double>& edges) {
    double lo = values.front(), hi = values.front();
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) throw std::domain_error("bin_series: series has zero range");
    double width = (hi - lo) / bins;
    edges.resize(bins + 1);
    for (int k = 0; k <= bins; ++k) edges[k] = lo + width * k;
    edges[bins] = hi;

    std::vector<int> ids;
    ids.reserve(values.size());
    for (double v : values) {
        int id = static_cast<int>((v - lo) / width);
        ids.push_back(std::min(id, bins - 1) + 1);
    }
    return ids;
}

}  // namespace

BinnedSeries bin_series(const TimeSeriesDataset& dataset, int num_states, int num_obs) {
    if (num_states < 2 || num_obs < 2)
        throw std::invalid_argument("bin_series: need at least 2 bins per axis");
    if (dataset.records.empty()) throw std::invalid_argument("bin_series: empty dataset");
    std::vector<double> hash, diff;
    hash.reserve(dataset.records.size());
    diff.reserve(dataset.records.size());
    for (const auto& r : dataset.records) {
        hash.push_back(r.hash_rate);
        diff.push_back(r.difficulty);
    }
    BinnedSeries out;
    out.state_ids = uniform_bin(hash, num_states, out.state_edges);
    out.obs_ids = uniform_bin(diff, num_obs, out.obs_edges);
    return out;
}

TransitionEstimate estimate_transition_mle(const std::vector<int>& state_ids, int num_states) {
    if (state_ids.size() < 2)
        throw std::invalid_argument("estimate_transition_mle: need at least 2 samples");
    Matrix counts(num_states, num_states);
    for (std::size_t t = 0; t + 1 < state_ids.size(); ++t) {
        int a = state_ids[t] - 1, b = state_ids[t + 1] - 1;
        if (a < 0 || a >= num_states || b < 0 || b >= num_states)
            throw std::invalid_argument("estimate_transition_mle: state id out of range");
        counts(a, b) += 1.0;
    }
    TransitionEstimate out;
    out.p = Matrix(num_states, num_states);
    for (int i = 0; i < num_states; ++i) {
        double total = 0.0;
        for (int j = 0; j < num_states; ++j) total += counts(i, j);
        if (total > 0.0) {
            for (int j = 0; j < num_states; ++j) out.p(i, j) = counts(i, j) / total;
        } else {
            for (int j = 0; j < num_states; ++j) out.p(i, j) = 1.0 / num_states;
            out.unvisited_states.push_back(i + 1);
        }
    }
    return out;
}

namespace {

/// Pool-adjacent-violators: least-squares non-decreasing fit.
void isotonic_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> vals;
    std::vector<double> wts;
    vals.reserve(n);
    wts.reserve(n);
    for (double x : v) {
        vals.push_back(x);
        wts.push_back(1.0);
        while (vals.size() > 1 && vals[vals.size() - 2] > vals.back()) {
            double v2 = vals.back(), w2 = wts.back();
            vals.pop_back();
            wts.pop_back();
            double v1 = vals.back(), w1 = wts.back();
            vals.back() = (v1 * w1 + v2 * w2) / (w1 + w2);
            wts.back() = w1 + w2;
        }
    }
    std::size_t k = 0;
    for (std::size_t g = 0; g < vals.size(); ++g)
        for (int rep = 0; rep < static_cast<int>(wts[g]); ++rep) v[k++] = vals[g];
}

/// TP2 for a positive matrix is supermodularity of its log: the per-row
/// differences log M(i,y+1) - log M(i,y) must be non-decreasing in i for
/// every y. Repairs them by isotonic regression, rebuilds rows from the
/// first column, and renormalizes (row scaling leaves the differences, and
/// hence TP2, intact).
Matrix repair_tp2(const Matrix& m, double floor_value) {
    const int r = static_cast<int>(m.rows()), c = static_cast<int>(m.cols());
    Matrix logm(r, c);
    for (int i = 0; i < r; ++i)
        for (int y = 0; y < c; ++y) logm(i, y) = std::log(std::max(m(i, y), floor_value));

    Matrix diffs(r, c - 1);
    for (int i = 0; i < r; ++i)
        for (int y = 0; y + 1 < c; ++y) diffs(i, y) = logm(i, y + 1) - logm(i, y);
    std::vector<double> col(r);
    for (int y = 0; y + 1 < c; ++y) {
        for (int i = 0; i < r; ++i) col[i] = diffs(i, y);
        isotonic_inplace(col);
        for (int i = 0; i < r; ++i) diffs(i, y) = col[i];
    }

    Matrix out(r, c);
    for (int i = 0; i < r; ++i) {
        double acc = logm(i, 0);
        out(i, 0) = acc;
        for (int y = 1; y < c; ++y) {
            acc += diffs(i, y - 1);
            out(i, y) = acc;
        }
        double mx = out(i, 0);
        for (int y = 0; y < c; ++y) mx = std::max(mx, out(i, y));
        double sum = 0.0;
        for (int y = 0; y < c; ++y) {
            out(i, y) = std::exp(out(i, y) - mx);
            sum += out(i, y);
        }
        for (int y = 0; y < c; ++y) out(i, y) /= sum;
    }
    return out;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double d = a(i, j) - b(i, j);
            s += d * d;
        }
    return std::sqrt(s);
}

}  // namespace

Matrix tp2_project(const Matrix& target) {
    if (target.empty()) throw std::invalid_argument("tp2_project: empty matrix");
    if (rows_stochastic(target, 1e-9) && is_tp2(target)) return target;

    const double floor_value = 1e-8;
    Matrix best = repair_tp2(target, floor_value);
    double best_dist = frobenius_distance(best, target);

    // Pull toward the target with a shrinking step, re-projecting each time;
    // keeps the closest TP2 iterate found.
    Matrix current = best;
    for (int k = 0; k < 60; ++k) {
        double step = std::pow(0.5, k / 10 + 1);
        Matrix blend(current.rows(), current.cols());
        for (std::size_t i = 0; i < current.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < current.cols(); ++j) {
                blend(i, j) =
                    (1.0 - step) * current(i, j) + step * std::max(target(i, j), floor_value);
                sum += blend(i, j);
            }
            for (std::size_t j = 0; j < current.cols(); ++j) blend(i, j) /= sum;
        }
        Matrix repaired = repair_tp2(blend, floor_value);
        if (is_tp2(repaired)) {
            current = repaired;
            double dist = frobenius_distance(current, target);
            if (dist < best_dist) {
                best = current;
                best_dist = dist;
            }
        }
    }
    return best;
}

ObservationEstimate estimate_observation_tp2(const std::vector<int>& state_ids,
                                             const std::vector<int>& obs_ids, int num_states,
                                             int num_obs) {
    if (state_ids.size() != obs_ids.size() || state_ids.empty())
        throw std::invalid_argument("estimate_observation_tp2: paired sequences required");
    Matrix counts(num_states, num_obs);
    for (std::size_t t = 0; t < state_ids.size(); ++t) {
        int i = state_ids[t] - 1, y = obs_ids[t] - 1;
        if (i < 0 || i >= num_states || y < 0 || y >= num_obs)
            throw std::invalid_argument("estimate_observation_tp2: id out of range");
        counts(i, y) += 1.0;
    }
    ObservationEstimate out;
    out.empirical = Matrix(num_states, num_obs);
    for (int i = 0; i < num_states; ++i) {
        double total = 0.0;
        for (int y = 0; y < num_obs; ++y) total += counts(i, y);
        for (int y = 0; y < num_obs; ++y)
            out.empirical(i, y) = total > 0.0 ? counts(i, y) / total : 1.0 / num_obs;
    }

    if (is_tp2(out.empirical)) {
        out.b = out.empirical;
        out.tp2_ok = true;
        out.projection_distance = 0.0;
        return out;
    }
    out.b = tp2_project(out.empirical);
    out.tp2_ok = is_tp2(out.b) && rows_stochastic(out.b, 1e-9);
    out.projection_distance = frobenius_distance(out.b, out.empirical);
    if (!out.tp2_ok) out.b = out.empirical;  // flagged; caller decides
    return out;
}

EstimatedModel estimate_model(const TimeSeriesDataset& dataset, int num_states, int num_obs,
                              const EstimationOptions& options) {
    EstimatedModel out;
    out.binned = bin_series(dataset, num_states, num_obs);
    out.transition = estimate_transition_mle(out.binned.state_ids, num_states);
    out.observation =
        estimate_observation_tp2(out.binned.state_ids, out.binned.obs_ids, num_states, num_obs);

    PomdpModel& m = out.model;
    m.transition = out.transition.p;
    m.observation = out.observation.b;
    m.discount = options.discount;
    m.num_stops = options.num_stops;

    // Winning probability scales inversely with total computing power; use
    // bin centers, normalized so state 1 (the least power) has reward 1.
    m.reward_mine.resize(num_states);
    std::vector<double> centers(num_states);
    for (int i = 0; i < num_states; ++i)
        centers[i] = 0.5 * (out.binned.state_edges[i] + out.binned.state_edges[i + 1]);
    for (int i = 0; i < num_states; ++i) m.reward_mine[i] = centers[0] / centers[i];

    m.initial_belief.assign(num_states, 0.0);
    m.initial_belief[num_states - 1] = 1.0;
    check_dimensions(m);
    return out;
}

}  // namespace multistop
