#include "multistop/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace multistop {

void check_dimensions(const PomdpModel& model) {
    const std::size_t n = model.transition.rows();
    if (n == 0) throw std::invalid_argument("model: empty state space");
    if (model.transition.cols() != n)
        throw std::invalid_argument("model: transition matrix is not square");
    if (model.observation.rows() != n)
        throw std::invalid_argument("model: observation rows != num states");
    if (model.observation.cols() == 0)
        throw std::invalid_argument("model: empty observation space");
    if (model.reward_mine.size() != n)
        throw std::invalid_argument("model: reward vector length != num states");
    if (model.initial_belief.size() != n)
        throw std::invalid_argument("model: initial belief length != num states");
    if (!(model.discount > 0.0 && model.discount < 1.0))
        throw std::invalid_argument("model: discount must lie in (0,1)");
    if (model.num_stops < 0) throw std::invalid_argument("model: negative stop budget");
}

bool rows_stochastic(const Matrix& m, double tol) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (double v : m.row(i)) {
            if (v < -tol) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

bool is_valid_belief(const Belief& pi) {
    double sum = 0.0;
    for (double v : pi) {
        if (v < -kProbTol || !std::isfinite(v)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= kProbTol;
}

bool is_tp2(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("is_tp2: empty matrix");
    const std::size_t r = m.rows(), c = m.cols();
    for (std::size_t i1 = 0; i1 < r; ++i1)
        for (std::size_t i2 = i1 + 1; i2 < r; ++i2)
            for (std::size_t j1 = 0; j1 < c; ++j1)
                for (std::size_t j2 = j1 + 1; j2 < c; ++j2)
                    if (m(i1, j1) * m(i2, j2) - m(i1, j2) * m(i2, j1) < -kMinorTol)
                        return false;
    return true;
}

namespace {

std::string first_bad_minor(const Matrix& m) {
    for (std::size_t i1 = 0; i1 < m.rows(); ++i1)
        for (std::size_t i2 = i1 + 1; i2 < m.rows(); ++i2)
            for (std::size_t j1 = 0; j1 < m.cols(); ++j1)
                for (std::size_t j2 = j1 + 1; j2 < m.cols(); ++j2) {
                    double det = m(i1, j1) * m(i2, j2) - m(i1, j2) * m(i2, j1);
                    if (det < -kMinorTol) {
                        std::ostringstream os;
                        os << "minor rows(" << i1 + 1 << "," << i2 + 1 << ") cols(" << j1 + 1
                           << "," << j2 + 1 << ") = " << det;
                        return os.str();
                    }
                }
    return {};
}

bool tridiagonal_dominant(const Matrix& p) {
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) {
            std::size_t d = i > j ? i - j : j - i;
            if (d > 1 && p(i, j) > kProbTol) return false;
            if (p(i, j) > p(i, i) + kProbTol) return false;
        }
    return true;
}

}  // namespace

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

bool ValidationReport::assumptions_pass() const {
    for (const auto& c : checks)
        if (!c.pass && c.name != "tridiagonal_dominant") return false;
    return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate_model(const PomdpModel& model) {
    check_dimensions(model);
    ValidationReport report;

    bool p_ok = rows_stochastic(model.transition);
    bool b_ok = rows_stochastic(model.observation);
    report.checks.push_back({"stochasticity", p_ok && b_ok,
                             p_ok ? (b_ok ? "" : "observation rows do not sum to 1")
                                  : "transition rows do not sum to 1"});

    bool p_nonneg = true, b_nonneg = true;
    for (double v : model.transition.data()) p_nonneg = p_nonneg && v >= -kProbTol;
    for (double v : model.observation.data()) b_nonneg = b_nonneg && v >= -kProbTol;

    bool tp2_p = p_nonneg && is_tp2(model.transition);
    report.checks.push_back(
        {"tp2_transition", tp2_p,
         tp2_p ? "" : (p_nonneg ? first_bad_minor(model.transition) : "negative entry")});

    bool tp2_b = b_nonneg && is_tp2(model.observation);
    report.checks.push_back(
        {"tp2_observation", tp2_b,
         tp2_b ? "" : (b_nonneg ? first_bad_minor(model.observation) : "negative entry")});

    report.checks.push_back({"tridiagonal_dominant", tridiagonal_dominant(model.transition), ""});

    bool mono = true;
    for (std::size_t i = 0; i + 1 < model.reward_mine.size(); ++i)
        mono = mono && model.reward_mine[i + 1] <= model.reward_mine[i] + kProbTol;
    for (double v : model.reward_mine) mono = mono && v >= -kProbTol && v <= 1.0 + kProbTol;
    report.checks.push_back({"reward_monotone", mono, ""});

    report.checks.push_back({"initial_belief", is_valid_belief(model.initial_belief), ""});
    return report;
}

MlrOrder mlr_compare(const Belief& a, const Belief& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mlr_compare: dimension mismatch");
    bool a_geq = true, b_geq = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if (a[j] * b[i] < b[j] * a[i] - kMinorTol) a_geq = false;
            if (b[j] * a[i] < a[j] * b[i] - kMinorTol) b_geq = false;
        }
    if (a_geq && b_geq) return MlrOrder::Equal;
    if (a_geq) return MlrOrder::Greater;
    if (b_geq) return MlrOrder::Less;
    return MlrOrder::Incomparable;
}

bool mlr_geq(const Belief& a, const Belief& b) {
    MlrOrder o = mlr_compare(a, b);
    return o == MlrOrder::Greater || o == MlrOrder::Equal;
}

FilterResult belief_update(const PomdpModel& model, const Belief& pi, int observation) {
    const int n = model.num_states();
    if (static_cast<int>(pi.size()) != n)
        throw std::invalid_argument("belief_update: belief dimension mismatch");
    if (observation < 1 || observation > model.num_observations())
        throw std::invalid_argument("belief_update: observation index out of range");
    const int y = observation - 1;

    std::vector<double> predicted = transpose_apply(model.transition, pi);
    FilterResult out;
    out.posterior.resize(n);
    double sigma = 0.0;
    for (int j = 0; j < n; ++j) {
        out.posterior[j] = model.observation(j, y) * predicted[j];
        sigma += out.posterior[j];
    }
    out.likelihood = sigma;
    if (sigma <= 0.0) {
        std::ostringstream os;
        os << "observation " << observation << " has zero likelihood under the predicted belief";
        throw impossible_observation(os.str());
    }
    double renorm = 0.0;
    for (double& v : out.posterior) {
        v /= sigma;
        renorm += v;
    }
    for (double& v : out.posterior) v /= renorm;
    return out;
}

double reward_of_belief(const PomdpModel& model, const Belief& pi, int action) {
    if (action == 1) return 0.0;
    if (action != 2) throw std::invalid_argument("reward_of_belief: action must be 1 or 2");
    return dot(model.reward_mine, pi);
}

AugmentedModel build_augmented_model(const PomdpModel& model) {
    check_dimensions(model);
    const int n = model.num_states();
    const int levels = model.num_stops;
    if (levels < 1) throw std::invalid_argument("build_augmented_model: needs num_stops >= 1");
    const int size = levels * n + 1;

    AugmentedModel out;
    out.transition_continue = Matrix(size, size);
    out.transition_mine = Matrix(size, size);

    for (int l = 0; l < levels; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.transition_continue(l * n + i, l * n + j) = model.transition(i, j);
    out.transition_continue(size - 1, size - 1) = 1.0;

    for (int l = 0; l + 1 < levels; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.transition_mine(l * n + i, (l + 1) * n + j) = model.transition(i, j);
    for (int i = 0; i < n; ++i) out.transition_mine((levels - 1) * n + i, size - 1) = 1.0;
    out.transition_mine(size - 1, size - 1) = 1.0;
    return out;
}

}  // namespace multistop
