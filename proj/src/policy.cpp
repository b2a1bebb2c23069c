#include "multistop/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace multistop {

void SoftmaxWindowPolicy::set_parameters(std::vector<double> params) {
    if (params.size() != params_.size())
        throw std::invalid_argument("SoftmaxWindowPolicy: wrong parameter count");
    params_ = std::move(params);
}

double SoftmaxWindowPolicy::prob_mine(int level, std::span<const int> observations) const {
    if (level < 1) throw std::invalid_argument("SoftmaxWindowPolicy: level out of range");
    const int l = std::min(level, num_stops_);
    double logit_dont = 0.0, logit_mine = 0.0;
    for (int k = 0; k < window_size_; ++k) {
        double w = 0.0;
        if (k < static_cast<int>(observations.size()))
            w = static_cast<double>(observations[observations.size() - 1 - k]);
        logit_dont += param(l, 1, k) * w;
        logit_mine += param(l, 2, k) * w;
    }
    return 1.0 / (1.0 + std::exp(logit_dont - logit_mine));
}

FirstLPolicy baseline_first_l() { return FirstLPolicy{}; }
RandomPolicy baseline_random(double p_mine) { return RandomPolicy(p_mine); }
SoftmaxWindowPolicy baseline_softmax(int num_stops, int window_size) {
    return SoftmaxWindowPolicy(num_stops, window_size);
}

}  // namespace multistop
