#include "smpstop/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace smpstop {

namespace {

using nlohmann::json;

SojournDistribution parse_sojourn(const json& spec) {
    if (!spec.is_object() || !spec.contains("type"))
        throw ValidationError("each sojourn entry must be an object with a \"type\" key");
    const std::string type = spec.at("type").get<std::string>();
    if (type == "exponential") return Exponential{spec.at("rate").get<Real>()};
    if (type == "deterministic") return Deterministic{spec.at("delay").get<Real>()};
    if (type == "weibull")
        return Weibull{spec.at("shape").get<Real>(), spec.at("scale").get<Real>()};
    if (type == "empirical")
        return Empirical{spec.at("times").get<std::vector<Real>>(),
                         spec.at("values").get<std::vector<Real>>()};
    throw ValidationError("unknown sojourn type \"" + type + "\"");
}

Vector to_vector(const json& arr) {
    auto values = arr.get<std::vector<Real>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Model parse_model(const json& doc) {
    Model model;
    model.states = doc.at("states").get<std::vector<std::string>>();
    model.beta = doc.at("beta").get<Real>();
    model.cost_rate = to_vector(doc.at("cost_rate"));
    model.terminal_cost = to_vector(doc.at("terminal_cost"));

    const json& kernel = doc.at("kernel");
    const json& rows = kernel.at("transition");
    if (!rows.is_array()) throw ValidationError("kernel.transition must be an array of rows");
    const Index n = static_cast<Index>(rows.size());
    model.kernel.transition.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        const Vector row = to_vector(rows.at(static_cast<std::size_t>(i)));
        if (row.size() != n)
            throw ValidationError("kernel.transition row " + std::to_string(i) +
                                  " has the wrong length");
        model.kernel.transition.row(i) = row;
    }

    const json& sojourn = kernel.at("sojourn");
    const std::string mode = sojourn.at("mode").get<std::string>();
    if (mode == "per_state")
        model.kernel.mode = SojournMode::per_state;
    else if (mode == "per_pair")
        model.kernel.mode = SojournMode::per_pair;
    else
        throw ValidationError("kernel.sojourn.mode must be \"per_state\" or \"per_pair\"");

    const json& dists = sojourn.at("distributions");
    if (model.kernel.mode == SojournMode::per_state) {
        for (const json& entry : dists) model.kernel.sojourns.push_back(parse_sojourn(entry));
    } else {
        // per-pair distributions come as an n x n array of arrays, row-major
        for (const json& row : dists)
            for (const json& entry : row) model.kernel.sojourns.push_back(parse_sojourn(entry));
    }
    return model;
}

}  // namespace

const SojournDistribution& KernelSpec::sojourn(Index i) const {
    return sojourns[static_cast<std::size_t>(i)];
}

const SojournDistribution& KernelSpec::sojourn(Index i, Index j) const {
    return sojourns[static_cast<std::size_t>(i * transition.cols() + j)];
}

Index Model::state_index(const std::string& name) const {
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end()) throw ValidationError("unknown state \"" + name + "\"");
    return static_cast<Index>(it - states.begin());
}

void validate_model(const Model& model) {
    const Index n = model.num_states();
    if (n == 0) throw ValidationError("model needs at least one state");
    if (std::set<std::string>(model.states.begin(), model.states.end()).size() !=
        model.states.size())
        throw ValidationError("state names must be unique");
    if (!std::isfinite(model.beta) || !(model.beta > 0))
        throw ValidationError("discount rate beta must be positive");
    if (model.cost_rate.size() != n || model.terminal_cost.size() != n)
        throw ValidationError("cost_rate and terminal_cost must list one entry per state");
    for (Index i = 0; i < n; ++i) {
        if (!std::isfinite(model.cost_rate(i)) || model.cost_rate(i) < 0)
            throw ValidationError("cost_rate must be nonnegative (state " + model.states[i] +
                                  ")");
        if (!std::isfinite(model.terminal_cost(i)) || model.terminal_cost(i) < 0)
            throw ValidationError("terminal_cost must be nonnegative (state " +
                                  model.states[i] + ")");
    }

    const Matrix& p = model.kernel.transition;
    if (p.rows() != n || p.cols() != n)
        throw ValidationError("transition matrix must be " + std::to_string(n) + "x" +
                              std::to_string(n));
    for (Index i = 0; i < n; ++i) {
        Real sum = 0;
        for (Index j = 0; j < n; ++j) {
            if (!std::isfinite(p(i, j)) || p(i, j) < 0)
                throw ValidationError("transition probabilities must be nonnegative (row " +
                                      model.states[i] + ")");
            sum += p(i, j);
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ValidationError("transition row for state " + model.states[i] +
                                  " sums to " + std::to_string(sum) + ", not 1");
    }

    const std::size_t expected = model.kernel.mode == SojournMode::per_state
                                     ? static_cast<std::size_t>(n)
                                     : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    if (model.kernel.sojourns.size() != expected)
        throw ValidationError("expected " + std::to_string(expected) +
                              " sojourn distributions, got " +
                              std::to_string(model.kernel.sojourns.size()));
    for (const SojournDistribution& dist : model.kernel.sojourns) validate_sojourn(dist);
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("model file " + path + " is not valid JSON: " + e.what());
    }
    Model model;
    try {
        model = parse_model(doc);
    } catch (const json::exception& e) {
        throw ValidationError("model file " + path + " is malformed: " + e.what());
    }
    validate_model(model);
    return model;
}

Real kernel_mass(const Model& model, Index i, Real t) {
    if (model.kernel.mode == SojournMode::per_state)
        return sojourn_cdf(model.kernel.sojourn(i), t);
    Real mass = 0;
    for (Index j = 0; j < model.num_states(); ++j)
        mass += model.kernel.transition(i, j) * sojourn_cdf(model.kernel.sojourn(i, j), t);
    return mass;
}

namespace {

RegularityWitness witness_at(const Model& model, Real delta) {
    Real worst = 0;
    for (Index i = 0; i < model.num_states(); ++i)
        worst = std::max(worst, kernel_mass(model, i, delta));
    RegularityWitness witness;
    witness.delta = delta;
    witness.epsilon_reg = 1.0 - worst;
    witness.delta_star = std::min(delta, 0.5);
    witness.gamma =
        1.0 - witness.epsilon_reg * (-std::expm1(-model.beta * witness.delta_star));
    return witness;
}

constexpr Real kUsableMargin = 1e-12;

}  // namespace

RegularityWitness find_regularity_witness(const Model& model, Real delta) {
    if (!std::isfinite(delta) || !(delta > 0))
        throw ValidationError("witness delta must be positive");
    const RegularityWitness witness = witness_at(model, delta);
    if (witness.epsilon_reg <= kUsableMargin)
        throw ValidationError("no regularity margin at delta=" + std::to_string(delta) +
                              ": the kernel mass already reaches " +
                              std::to_string(1.0 - witness.epsilon_reg));
    return witness;
}

RegularityWitness find_regularity_witness(const Model& model) {
    const Real lo = std::log(1e-4);
    const Real hi = std::log(0.5);
    RegularityWitness best;
    bool found = false;
    for (int k = 0; k < 64; ++k) {
        const Real delta = std::exp(lo + (hi - lo) * static_cast<Real>(k + 1) / 64.0);
        const RegularityWitness candidate = witness_at(model, delta);
        if (candidate.epsilon_reg <= kUsableMargin) continue;
        if (!found || candidate.gamma < best.gamma) {
            best = candidate;
            found = true;
        }
    }
    if (!found)
        throw ValidationError(
            "no regularity witness: every scanned delta in (1e-4, 1/2] leaves the kernel "
            "mass at 1 within 1e-12");
    return best;
}

}  // namespace smpstop
