#include "ptsa/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "ptsa/parallel.hpp"
#include "ptsa/stats.hpp"

namespace ptsa {

std::vector<double> bin_probabilities(int q, double p0, double p_e_hat) {
    if (q < 1) throw Error(ErrorCode::invalid_argument, "q must be at least 1");
    if (!(p0 > 0.0) || !(p0 < 1.0))
        throw Error(ErrorCode::invalid_argument, "p0 must lie in (0, 1)");
    if (p_e_hat < 0.0 || p_e_hat > 1.0)
        throw Error(ErrorCode::invalid_argument, "p_e_hat must lie in [0, 1]");

    std::vector<double> p(static_cast<size_t>(q) + 1);
    if (q == 1) {
        p[0] = 1.0 - p_e_hat;
        p[1] = p_e_hat;
        return p;
    }
    p[0] = 1.0 - p0;
    for (int k = 1; k <= q - 2; ++k) p[static_cast<size_t>(k)] = std::pow(p0, k) * (1.0 - p0);
    p[static_cast<size_t>(q) - 1] = std::pow(p0, q - 1) * (1.0 - p_e_hat);
    p[static_cast<size_t>(q)] = std::pow(p0, q - 1) * p_e_hat;
    return p;
}

BinPartition BinPartition::make(int q, double p0, double p_e_hat,
                                std::vector<double> thresholds) {
    if (static_cast<int>(thresholds.size()) != q - 1)
        throw Error(ErrorCode::invalid_argument, "need exactly q-1 thresholds");
    for (size_t k = 0; k < thresholds.size(); ++k) {
        if (!(thresholds[k] > 0.0))
            throw Error(ErrorCode::invalid_argument, "subset thresholds must be positive");
        if (k > 0 && !(thresholds[k] < thresholds[k - 1]))
            throw Error(ErrorCode::invalid_argument, "thresholds must strictly decrease");
    }
    BinPartition part;
    part.q = q;
    part.p0 = p0;
    part.p_e_hat = p_e_hat;
    part.thresholds = std::move(thresholds);
    part.probabilities = bin_probabilities(q, p0, p_e_hat);
    double sum = 0.0;
    for (double p : part.probabilities) sum += p;
    if (std::abs(sum - 1.0) > 1e-12)
        throw Error(ErrorCode::internal, "bin probabilities do not sum to 1");
    return part;
}

BinPartition BinPartition::from_subsim(const SubSimResult& result) {
    if (result.q < 1 || static_cast<int>(result.levels.size()) != result.q)
        throw Error(ErrorCode::invalid_argument, "subsim result has no complete levels");
    std::vector<double> thresholds;
    for (int k = 0; k < result.q - 1; ++k)
        thresholds.push_back(result.levels[static_cast<size_t>(k)].threshold);
    return make(result.q, result.p0, result.p_e_hat, std::move(thresholds));
}

int BinPartition::bin_of(double margin) const {
    if (margin < 0.0) return q;
    int bin = 0;
    for (size_t k = 0; k < thresholds.size(); ++k) {
        if (margin <= thresholds[k]) {
            bin = static_cast<int>(k) + 1;
        } else {
            break;
        }
    }
    return bin;
}

namespace {

double marginal_ppf(const MarginalSpec& m, double p) {
    if (m.kind == MarginalKind::gaussian) return m.mean + m.std_dev * stats::norm_ppf(p);
    return stats::weibull_ppf(p, m.scale, m.shape);
}

double support_lower(const MarginalSpec& m) {
    return m.kind == MarginalKind::gaussian ? -std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

IntervalGrid1D IntervalGrid1D::make(const InputModel& model, int input_index, int intervals) {
    if (input_index < 0 || input_index >= model.dimension())
        throw Error(ErrorCode::invalid_argument, "input index out of range");
    if (intervals < 2) throw Error(ErrorCode::invalid_argument, "need at least 2 intervals");

    const MarginalSpec& m = model.marginals()[static_cast<size_t>(input_index)];
    IntervalGrid1D grid;
    grid.input_index = input_index;
    grid.edges.resize(static_cast<size_t>(intervals) + 1);
    grid.edges.front() = support_lower(m);
    grid.edges.back() = std::numeric_limits<double>::infinity();
    for (int h = 1; h < intervals; ++h)
        grid.edges[static_cast<size_t>(h)] =
            marginal_ppf(m, static_cast<double>(h) / static_cast<double>(intervals));
    for (size_t h = 1; h < grid.edges.size(); ++h)
        if (!(grid.edges[h] > grid.edges[h - 1]))
            throw Error(ErrorCode::numerical, "percentile splits are not strictly increasing");
    return grid;
}

int IntervalGrid1D::interval_of(double value) const {
    const auto it = std::upper_bound(edges.begin(), edges.end(), value);
    const int h = static_cast<int>(it - edges.begin()) - 1;
    return std::clamp(h, 0, interval_count() - 1);
}

IntervalGrid2D IntervalGrid2D::make(const InputModel& model, int i, int j,
                                    int intervals_per_axis) {
    if (i == j) throw Error(ErrorCode::invalid_argument, "2-D grid needs two distinct inputs");
    IntervalGrid2D grid;
    grid.axis_i = IntervalGrid1D::make(model, i, intervals_per_axis);
    grid.axis_j = IntervalGrid1D::make(model, j, intervals_per_axis);
    return grid;
}

int IntervalGrid2D::cell_of(double value_i, double value_j) const {
    return axis_i.interval_of(value_i) * axis_j.interval_count() + axis_j.interval_of(value_j);
}

namespace {

using CellIndexer = std::function<int(const MarginSample&)>;

std::vector<double> stratified_estimate(int n_cells, const CellIndexer& cell_of,
                                        const BinPartition& partition,
                                        const std::vector<MarginSample>& samples,
                                        bool conditional) {
    const int nb = partition.q + 1;
    std::vector<long> n_k(static_cast<size_t>(nb), 0);
    std::vector<long> n_kf(static_cast<size_t>(nb), 0);
    std::vector<std::vector<long>> n_kh(static_cast<size_t>(nb),
                                        std::vector<long>(static_cast<size_t>(n_cells), 0));
    std::vector<std::vector<long>> n_khf(static_cast<size_t>(nb),
                                         std::vector<long>(static_cast<size_t>(n_cells), 0));

    for (const MarginSample& s : samples) {
        const int k = partition.bin_of(s.ptsm_cycles);
        const int h = cell_of(s);
        ++n_k[static_cast<size_t>(k)];
        ++n_kh[static_cast<size_t>(k)][static_cast<size_t>(h)];
        if (s.ptsm_cycles < 0.0) {
            ++n_kf[static_cast<size_t>(k)];
            ++n_khf[static_cast<size_t>(k)][static_cast<size_t>(h)];
        }
    }

    for (int k = 0; k < nb; ++k) {
        if (n_k[static_cast<size_t>(k)] == 0 &&
            partition.probabilities[static_cast<size_t>(k)] > 0.0)
            throw Error(ErrorCode::invalid_argument,
                        "empty stratum: bin " + std::to_string(k) +
                            " has probability mass but no samples");
    }

    std::vector<double> out(static_cast<size_t>(n_cells), 0.0);
    if (!conditional) {
        for (int k = 0; k < nb; ++k) {
            if (n_k[static_cast<size_t>(k)] == 0) continue;
            const double w = partition.probabilities[static_cast<size_t>(k)] /
                             static_cast<double>(n_k[static_cast<size_t>(k)]);
            for (int h = 0; h < n_cells; ++h)
                out[static_cast<size_t>(h)] +=
                    w * static_cast<double>(n_kh[static_cast<size_t>(k)][static_cast<size_t>(h)]);
        }
        return out;
    }

    double denom = 0.0;
    for (int k = 0; k < nb; ++k) {
        if (n_k[static_cast<size_t>(k)] == 0) continue;
        const double w = partition.probabilities[static_cast<size_t>(k)] /
                         static_cast<double>(n_k[static_cast<size_t>(k)]);
        denom += w * static_cast<double>(n_kf[static_cast<size_t>(k)]);
        for (int h = 0; h < n_cells; ++h)
            out[static_cast<size_t>(h)] +=
                w * static_cast<double>(n_khf[static_cast<size_t>(k)][static_cast<size_t>(h)]);
    }
    if (!(denom > 0.0))
        throw Error(ErrorCode::invalid_argument,
                    "no failure samples: conditional distribution is undefined "
                    "(run subset simulation to obtain TI samples)");
    for (double& v : out) v /= denom;
    return out;
}

}  // namespace

std::vector<double> interval_probability(const IntervalGrid1D& grid, const BinPartition& partition,
                                         const std::vector<MarginSample>& samples) {
    return stratified_estimate(
        grid.interval_count(),
        [&grid](const MarginSample& s) { return grid.interval_of(s.point.x[grid.input_index]); },
        partition, samples, false);
}

std::vector<double> conditional_interval_probability(const IntervalGrid1D& grid,
                                                     const BinPartition& partition,
                                                     const std::vector<MarginSample>& samples) {
    return stratified_estimate(
        grid.interval_count(),
        [&grid](const MarginSample& s) { return grid.interval_of(s.point.x[grid.input_index]); },
        partition, samples, true);
}

std::vector<double> interval_probability_2d(const IntervalGrid2D& grid,
                                            const BinPartition& partition,
                                            const std::vector<MarginSample>& samples) {
    return stratified_estimate(grid.cell_count(),
                               [&grid](const MarginSample& s) {
                                   return grid.cell_of(s.point.x[grid.axis_i.input_index],
                                                       s.point.x[grid.axis_j.input_index]);
                               },
                               partition, samples, false);
}

std::vector<double> conditional_interval_probability_2d(const IntervalGrid2D& grid,
                                                        const BinPartition& partition,
                                                        const std::vector<MarginSample>& samples) {
    return stratified_estimate(grid.cell_count(),
                               [&grid](const MarginSample& s) {
                                   return grid.cell_of(s.point.x[grid.axis_i.input_index],
                                                       s.point.x[grid.axis_j.input_index]);
                               },
                               partition, samples, true);
}

double tvd_1d(const std::vector<double>& unconditional, const std::vector<double>& conditional) {
    if (unconditional.size() != conditional.size())
        throw Error(ErrorCode::invalid_argument, "distributions live on different grids");
    double l1 = 0.0;
    for (size_t h = 0; h < unconditional.size(); ++h)
        l1 += std::abs(unconditional[h] - conditional[h]);
    return 0.5 * l1;
}

double tvd_2d(const std::vector<double>& unconditional, const std::vector<double>& conditional) {
    return tvd_1d(unconditional, conditional);
}

TvdReport analyze_sensitivity(const std::vector<MarginSample>& samples,
                              const BinPartition& partition, const InputModel& model,
                              const SensitivityConfig& cfg) {
    if (samples.empty()) throw Error(ErrorCode::invalid_argument, "no samples to analyze");

    std::set<int> paired;
    std::vector<CopulaPair> pairs;
    for (const CopulaPair& p : model.copula_pairs()) {
        if (p.rho == 0.0) continue;
        pairs.push_back(p);
        paired.insert(p.i);
        paired.insert(p.j);
    }

    TvdReport report;
    for (int i = 0; i < model.dimension(); ++i) {
        if (paired.count(i)) continue;
        const IntervalGrid1D grid = IntervalGrid1D::make(model, i, cfg.intervals_1d);
        const std::vector<double> p_u = interval_probability(grid, partition, samples);
        const std::vector<double> p_c = conditional_interval_probability(grid, partition, samples);

        InputTvd entry;
        entry.name = model.marginals()[static_cast<size_t>(i)].name;
        entry.inputs = {i};
        entry.eta = tvd_1d(p_u, p_c);
        for (int h = 0; h < grid.interval_count(); ++h) {
            IntervalCell cell;
            cell.lower = grid.edges[static_cast<size_t>(h)];
            cell.upper = grid.edges[static_cast<size_t>(h) + 1];
            cell.p_uncond = p_u[static_cast<size_t>(h)];
            cell.p_cond = p_c[static_cast<size_t>(h)];
            entry.cells.push_back(cell);
        }
        report.entries.push_back(std::move(entry));
    }

    for (const CopulaPair& p : pairs) {
        const IntervalGrid2D grid = IntervalGrid2D::make(model, p.i, p.j, cfg.intervals_2d);
        const std::vector<double> p_u = interval_probability_2d(grid, partition, samples);
        const std::vector<double> p_c =
            conditional_interval_probability_2d(grid, partition, samples);

        InputTvd entry;
        entry.name = model.marginals()[static_cast<size_t>(p.i)].name + "*" +
                     model.marginals()[static_cast<size_t>(p.j)].name;
        entry.inputs = {p.i, p.j};
        entry.eta = tvd_2d(p_u, p_c);
        const int nj = grid.axis_j.interval_count();
        for (int hi = 0; hi < grid.axis_i.interval_count(); ++hi) {
            for (int hj = 0; hj < nj; ++hj) {
                IntervalCell cell;
                cell.lower = grid.axis_i.edges[static_cast<size_t>(hi)];
                cell.upper = grid.axis_i.edges[static_cast<size_t>(hi) + 1];
                cell.lower2 = grid.axis_j.edges[static_cast<size_t>(hj)];
                cell.upper2 = grid.axis_j.edges[static_cast<size_t>(hj) + 1];
                const size_t flat = static_cast<size_t>(hi * nj + hj);
                cell.p_uncond = p_u[flat];
                cell.p_cond = p_c[flat];
                entry.cells.push_back(cell);
            }
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

namespace {

nlohmann::json bound_to_json(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

void append_bound(std::string& line, double v) {
    char buf[40];
    if (std::isfinite(v)) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        line += buf;
    } else {
        line += v > 0 ? "inf" : "-inf";
    }
}

}  // namespace

nlohmann::json TvdReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["entries"] = nlohmann::json::array();
    for (const InputTvd& entry : entries) {
        nlohmann::json je;
        je["name"] = entry.name;
        je["inputs"] = entry.inputs;
        je["eta"] = entry.eta;
        je["cells"] = nlohmann::json::array();
        const bool is_2d = entry.inputs.size() == 2;
        for (const IntervalCell& cell : entry.cells) {
            nlohmann::json jc{{"lower", bound_to_json(cell.lower)},
                              {"upper", bound_to_json(cell.upper)},
                              {"p_uncond", cell.p_uncond},
                              {"p_cond", cell.p_cond}};
            if (is_2d) {
                jc["lower2"] = bound_to_json(cell.lower2);
                jc["upper2"] = bound_to_json(cell.upper2);
            }
            je["cells"].push_back(std::move(jc));
        }
        j["entries"].push_back(std::move(je));
    }
    return j;
}

void TvdReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "input,interval_lower,interval_upper,interval_lower_2,interval_upper_2,"
           "p_uncond,p_cond\n";
    char buf[40];
    for (const InputTvd& entry : entries) {
        const bool is_2d = entry.inputs.size() == 2;
        for (const IntervalCell& cell : entry.cells) {
            std::string line = entry.name;
            line += ',';
            append_bound(line, cell.lower);
            line += ',';
            append_bound(line, cell.upper);
            line += ',';
            if (is_2d) append_bound(line, cell.lower2);
            line += ',';
            if (is_2d) append_bound(line, cell.upper2);
            line += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", cell.p_uncond);
            line += buf;
            line += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", cell.p_cond);
            line += buf;
            out << line << '\n';
        }
    }
    if (!out) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

double TvdReport::eta_for(int index) const {
    for (const InputTvd& entry : entries)
        if (entry.inputs.size() == 1 && entry.inputs[0] == index) return entry.eta;
    throw Error(ErrorCode::invalid_argument,
                "no 1-D sensitivity entry for input " + std::to_string(index));
}

CompensationResult compensation_test(const std::vector<MarginSample>& samples, int target_index,
                                     double clamp_sigmas, const LimitState& limit_state,
                                     const InputModel& model, int parallelism,
                                     bool full_reevaluation) {
    if (target_index < 0 || target_index >= model.dimension())
        throw Error(ErrorCode::invalid_argument, "target input index out of range");
    const MarginalSpec& target = model.marginals()[static_cast<size_t>(target_index)];
    if (target.kind != MarginalKind::gaussian)
        throw Error(ErrorCode::unsupported, "clamp rule defined for Gaussian marginals only");
    if (!(clamp_sigmas > 0.0))
        throw Error(ErrorCode::invalid_argument, "clamp_sigmas must be positive");

    CompensationResult result;
    result.target_index = target_index;
    result.target_name = target.name;
    result.clamp_value = target.mean - clamp_sigmas * target.std_dev;
    result.full_reevaluation = full_reevaluation;

    std::vector<size_t> to_reevaluate;
    std::vector<char> was_ti(samples.size(), 0);
    for (size_t i = 0; i < samples.size(); ++i) {
        const MarginSample& s = samples[i];
        const bool ti = s.ptsm_cycles < 0.0;
        was_ti[i] = ti ? 1 : 0;
        if (ti) ++result.n_ti_before;
        const bool below = s.point.x[target_index] < result.clamp_value;
        if (below && (ti || full_reevaluation)) to_reevaluate.push_back(i);
        if (below && ti) ++result.n_clamped;
    }

    std::vector<double> new_margins(to_reevaluate.size());
    parallel_for(to_reevaluate.size(), parallelism, [&](size_t k) {
        const MarginSample& s = samples[to_reevaluate[k]];
        Eigen::VectorXd x = s.point.x;
        x[target_index] = result.clamp_value;
        const Eigen::VectorXd u = model.x_to_u(x);
        new_margins[k] = limit_state(ScenarioPoint{u, x});
    });

    std::vector<double> final_margin(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) final_margin[i] = samples[i].ptsm_cycles;
    for (size_t k = 0; k < to_reevaluate.size(); ++k)
        final_margin[to_reevaluate[k]] = new_margins[k];

    for (size_t i = 0; i < samples.size(); ++i) {
        if (was_ti[i] && final_margin[i] < 0.0) ++result.n_ti_after;
        if (full_reevaluation && final_margin[i] < 0.0) ++result.n_ti_after_full;
    }
    return result;
}

}  // namespace ptsa
