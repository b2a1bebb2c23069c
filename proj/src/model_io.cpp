#include "multistop/model_io.hpp"

#include <cstdio>
#include <cctype>
#include <fstream>
#include <sstream>

namespace multistop {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

/// Token stream over a key/value text file; '#' starts a comment to
/// end of line.
class TokenReader {
public:
    explicit TokenReader(const std::string& path) : in_(path), path_(path) {
        if (!in_) throw std::runtime_error("cannot open " + path);
    }

    bool next(std::string& out) {
        while (true) {
            if (pos_ >= line_.size()) {
                if (!std::getline(in_, line_)) return false;
                auto hash = line_.find('#');
                if (hash != std::string::npos) line_.resize(hash);
                pos_ = 0;
                continue;
            }
            while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            if (pos_ >= line_.size()) continue;
            std::size_t start = pos_;
            while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            out = line_.substr(start, pos_ - start);
            return true;
        }
    }

    std::string require(const std::string& what) {
        std::string tok;
        if (!next(tok)) throw std::runtime_error(path_ + ": unexpected end of file in " + what);
        return tok;
    }

    double real(const std::string& what) {
        std::string tok = require(what);
        try {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (...) {
            throw std::runtime_error(path_ + ": bad number '" + tok + "' in " + what);
        }
    }

    long integer(const std::string& what) {
        std::string tok = require(what);
        try {
            std::size_t pos = 0;
            long v = std::stol(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (...) {
            throw std::runtime_error(path_ + ": bad integer '" + tok + "' in " + what);
        }
    }

    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
    std::string line_;
    std::size_t pos_ = 0;
};

Matrix read_matrix(TokenReader& reader, int rows, int cols, const std::string& what) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = reader.real(what);
    return m;
}

}  // namespace

PomdpModel load_model(const std::string& path) {
    TokenReader reader(path);
    PomdpModel model;
    int n = -1, nobs = -1;
    bool have_transition = false, have_observation = false, have_reward = false,
         have_belief = false, have_discount = false, have_stops = false;

    std::string key;
    while (reader.next(key)) {
        if (key == "num_states") {
            n = static_cast<int>(reader.integer(key));
            if (n < 1) throw std::runtime_error(path + ": num_states must be positive");
        } else if (key == "num_observations") {
            nobs = static_cast<int>(reader.integer(key));
            if (nobs < 1) throw std::runtime_error(path + ": num_observations must be positive");
        } else if (key == "discount") {
            model.discount = reader.real(key);
            have_discount = true;
        } else if (key == "num_stops") {
            model.num_stops = static_cast<int>(reader.integer(key));
            have_stops = true;
        } else if (key == "initial_belief") {
            if (n < 0) throw std::runtime_error(path + ": num_states must precede initial_belief");
            model.initial_belief.resize(n);
            for (int i = 0; i < n; ++i) model.initial_belief[i] = reader.real(key);
            have_belief = true;
        } else if (key == "transition") {
            if (n < 0) throw std::runtime_error(path + ": num_states must precede transition");
            model.transition = read_matrix(reader, n, n, key);
            have_transition = true;
        } else if (key == "observation") {
            if (n < 0 || nobs < 0)
                throw std::runtime_error(path + ": dimensions must precede observation");
            model.observation = read_matrix(reader, n, nobs, key);
            have_observation = true;
        } else if (key == "reward_mine") {
            if (n < 0) throw std::runtime_error(path + ": num_states must precede reward_mine");
            model.reward_mine.resize(n);
            for (int i = 0; i < n; ++i) model.reward_mine[i] = reader.real(key);
            have_reward = true;
        } else {
            throw std::runtime_error(path + ": unknown field '" + key + "'");
        }
    }
    if (!(have_transition && have_observation && have_reward && have_belief && have_discount &&
          have_stops))
        throw std::runtime_error(path + ": missing required fields");
    check_dimensions(model);
    return model;
}

void save_model(const std::string& path, const PomdpModel& model, const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "num_states " << model.num_states() << "\n";
    out << "num_observations " << model.num_observations() << "\n";
    out << "discount " << format_real(model.discount) << "\n";
    out << "num_stops " << model.num_stops << "\n";
    out << "initial_belief";
    for (double v : model.initial_belief) out << ' ' << format_real(v);
    out << "\ntransition\n";
    for (int i = 0; i < model.num_states(); ++i) {
        for (int j = 0; j < model.num_states(); ++j)
            out << (j ? " " : "") << format_real(model.transition(i, j));
        out << "\n";
    }
    out << "observation\n";
    for (int i = 0; i < model.num_states(); ++i) {
        for (int y = 0; y < model.num_observations(); ++y)
            out << (y ? " " : "") << format_real(model.observation(i, y));
        out << "\n";
    }
    out << "reward_mine";
    for (double v : model.reward_mine) out << ' ' << format_real(v);
    out << "\n";
}

LinearThresholdPolicy load_policy(const std::string& path) {
    TokenReader reader(path);
    LinearThresholdPolicy policy;
    int stops = -1;
    std::string key;
    while (reader.next(key)) {
        if (key == "num_stops") {
            stops = static_cast<int>(reader.integer(key));
        } else if (key == "num_states") {
            policy.num_states = static_cast<int>(reader.integer(key));
        } else if (key == "theta") {
            if (stops < 1 || policy.num_states < 2)
                throw std::runtime_error(path + ": dimensions must precede theta");
            policy.theta = read_matrix(reader, stops, policy.num_states - 1, key);
        } else {
            throw std::runtime_error(path + ": unknown field '" + key + "'");
        }
    }
    if (policy.theta.empty()) throw std::runtime_error(path + ": missing theta");
    return policy;
}

void save_policy(const std::string& path, const LinearThresholdPolicy& policy,
                 const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "num_stops " << policy.num_stops() << "\n";
    out << "num_states " << policy.num_states << "\n";
    out << "theta\n";
    for (int l = 0; l < policy.num_stops(); ++l) {
        for (int i = 0; i + 1 < policy.num_states; ++i)
            out << (i ? " " : "") << format_real(policy.theta(l, i));
        out << "\n";
    }
}

void save_value_table(const std::string& path, const ValueTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const SimplexGrid& grid = table.grid();
    out << "#";
    for (int i = 0; i < grid.num_states(); ++i) out << " pi" << i + 1;
    out << " level value action\n";
    for (int p = 0; p < grid.size(); ++p)
        for (int l = 1; l <= table.num_levels(); ++l) {
            auto pt = grid.point(p);
            for (int i = 0; i < grid.num_states(); ++i)
                out << format_real(pt[i]) << '\t';
            out << l << '\t' << format_real(table.value(p, l)) << '\t' << table.action(p, l)
                << "\n";
        }
}

void save_trace(const std::string& path, const TrainingTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# iteration a_n c_n j_estimate\n";
    for (const auto& e : trace)
        out << e.iteration << '\t' << format_real(e.a) << '\t' << format_real(e.c) << '\t'
            << format_real(e.j_estimate) << "\n";
}

}  // namespace multistop
