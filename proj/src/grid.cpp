#include "ptsa/grid.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "ptsa/errors.hpp"
#include "ptsa/json_util.hpp"

namespace ptsa {

using std::complex;
using cd = complex<double>;

namespace {

bool same_endpoints(const LineSpec& line, const std::pair<int, int>& ends) {
    return (line.from_bus == ends.first && line.to_bus == ends.second) ||
           (line.from_bus == ends.second && line.to_bus == ends.first);
}

}  // namespace

int GridCase::bus_index(int bus_id) const {
    if (bus_id < 1 || bus_id > bus_count())
        throw Error(ErrorCode::invalid_argument, "unknown bus id " + std::to_string(bus_id));
    return bus_id - 1;
}

void GridCase::validate() const {
    if (buses.empty()) throw Error(ErrorCode::invalid_argument, "case has no buses");
    if (!(system_mva_base > 0.0))
        throw Error(ErrorCode::invalid_argument, "system_mva_base must be positive");

    std::set<int> ids;
    int slack_count = 0;
    for (const auto& b : buses) {
        if (!ids.insert(b.id).second)
            throw Error(ErrorCode::invalid_argument, "duplicate bus id " + std::to_string(b.id));
        if (b.kind == BusKind::slack) ++slack_count;
        if (!(b.base_voltage_magnitude > 0.0) || !(b.voltage_setpoint > 0.0))
            throw Error(ErrorCode::invalid_argument,
                        "bus " + std::to_string(b.id) + ": voltage must be positive");
    }
    if (*ids.begin() != 1 || *ids.rbegin() != bus_count())
        throw Error(ErrorCode::invalid_argument, "bus ids must be contiguous from 1");
    if (slack_count != 1)
        throw Error(ErrorCode::invalid_argument,
                    "case needs exactly one slack bus, found " + std::to_string(slack_count));

    auto check_bus = [&](int id, const std::string& what) {
        if (!ids.count(id))
            throw Error(ErrorCode::invalid_argument,
                        what + " references unknown bus " + std::to_string(id));
    };

    for (const auto& l : lines) {
        check_bus(l.from_bus, "line");
        check_bus(l.to_bus, "line");
        if (l.from_bus == l.to_bus)
            throw Error(ErrorCode::invalid_argument,
                        "line endpoints coincide at bus " + std::to_string(l.from_bus));
        if (!(std::hypot(l.series_resistance, l.series_reactance) > 0.0))
            throw Error(ErrorCode::invalid_argument, "line " + std::to_string(l.from_bus) + "-" +
                                                         std::to_string(l.to_bus) +
                                                         ": zero series impedance");
        if (!(l.tap_ratio > 0.0))
            throw Error(ErrorCode::invalid_argument, "line " + std::to_string(l.from_bus) + "-" +
                                                         std::to_string(l.to_bus) +
                                                         ": tap ratio must be positive");
    }

    std::set<int> gen_buses;
    for (const auto& g : generators) {
        check_bus(g.bus, "generator");
        const BusSpec& b = buses[bus_index(g.bus)];
        if (b.kind == BusKind::pq)
            throw Error(ErrorCode::invalid_argument,
                        "generator at bus " + std::to_string(g.bus) + " requires a pv or slack bus");
        if (!gen_buses.insert(g.bus).second)
            throw Error(ErrorCode::invalid_argument,
                        "multiple generators at bus " + std::to_string(g.bus));
        if (!(g.inertia_constant_H > 0.0) || !(g.transient_reactance_xd_prime > 0.0) ||
            g.damping_D < 0.0 || !(g.mva_base > 0.0))
            throw Error(ErrorCode::invalid_argument,
                        "generator at bus " + std::to_string(g.bus) + ": invalid parameters");
    }
    for (const auto& b : buses) {
        if (b.kind != BusKind::pq && !gen_buses.count(b.id))
            throw Error(ErrorCode::invalid_argument,
                        "bus " + std::to_string(b.id) + " is a generator bus without a generator");
    }

    std::set<int> load_buses, farm_buses;
    for (const auto& l : loads) {
        check_bus(l.bus, "load");
        if (l.base_active_power < 0.0)
            throw Error(ErrorCode::invalid_argument,
                        "load at bus " + std::to_string(l.bus) + ": negative base power");
        if (!load_buses.insert(l.bus).second)
            throw Error(ErrorCode::invalid_argument,
                        "multiple loads at bus " + std::to_string(l.bus));
    }
    for (const auto& w : wind_farms) {
        check_bus(w.bus, "wind farm");
        if (!(0.0 < w.v_in && w.v_in < w.v_r && w.v_r < w.v_out))
            throw Error(ErrorCode::invalid_argument,
                        "wind farm at bus " + std::to_string(w.bus) +
                            ": need 0 < v_in < v_r < v_out");
        if (w.rated_power < 0.0 || !(w.P_r > 0.0))
            throw Error(ErrorCode::invalid_argument,
                        "wind farm at bus " + std::to_string(w.bus) + ": invalid power rating");
        if (!farm_buses.insert(w.bus).second)
            throw Error(ErrorCode::invalid_argument,
                        "multiple wind farms at bus " + std::to_string(w.bus));
    }

    check_bus(fault.faulted_bus, "fault");
    if (!(fault.fault_start_time >= 0.0) || !(fault.nominal_frequency > 0.0))
        throw Error(ErrorCode::invalid_argument, "fault timing or frequency invalid");
    const LineSpec* tripped = nullptr;
    for (const auto& l : lines)
        if (l.in_service && same_endpoints(l, fault.tripped_line)) tripped = &l;
    if (!tripped)
        throw Error(ErrorCode::invalid_argument,
                    "tripped line " + std::to_string(fault.tripped_line.first) + "-" +
                        std::to_string(fault.tripped_line.second) + " is not an in-service line");
    if (fault.faulted_bus != fault.tripped_line.first &&
        fault.faulted_bus != fault.tripped_line.second)
        throw Error(ErrorCode::invalid_argument,
                    "faulted bus " + std::to_string(fault.faulted_bus) +
                        " is not an endpoint of the tripped line");
}

AdmittanceMatrix build_ybus(const GridCase& grid, TopologyVariant variant) {
    const int n = grid.bus_count();
    AdmittanceMatrix ybus;
    ybus.dimension = n;
    ybus.entries = Eigen::MatrixXcd::Zero(n, n);

    const bool drop_tripped = variant == TopologyVariant::post_fault;
    for (const auto& l : grid.lines) {
        if (!l.in_service) continue;
        if (drop_tripped && same_endpoints(l, grid.fault.tripped_line)) continue;
        const int f = grid.bus_index(l.from_bus);
        const int t = grid.bus_index(l.to_bus);
        const cd y = 1.0 / cd(l.series_resistance, l.series_reactance);
        const cd y_sh(0.0, 0.5 * l.shunt_susceptance);
        const double a = l.tap_ratio;
        ybus.entries(f, f) += (y + y_sh) / (a * a);
        ybus.entries(t, t) += y + y_sh;
        ybus.entries(f, t) -= y / a;
        ybus.entries(t, f) -= y / a;
    }

    if (variant == TopologyVariant::fault_on) {
        const int f = grid.bus_index(grid.fault.faulted_bus);
        ybus.entries(f, f) += kFaultShuntAdmittance;
    }

    if (drop_tripped) {
        // connectivity over the surviving series branches
        std::vector<std::vector<int>> adj(n);
        for (const auto& l : grid.lines) {
            if (!l.in_service || same_endpoints(l, grid.fault.tripped_line)) continue;
            adj[grid.bus_index(l.from_bus)].push_back(grid.bus_index(l.to_bus));
            adj[grid.bus_index(l.to_bus)].push_back(grid.bus_index(l.from_bus));
        }
        std::vector<char> seen(n, 0);
        std::queue<int> frontier;
        frontier.push(0);
        seen[0] = 1;
        int reached = 1;
        while (!frontier.empty()) {
            const int i = frontier.front();
            frontier.pop();
            for (int j : adj[i]) {
                if (!seen[j]) {
                    seen[j] = 1;
                    ++reached;
                    frontier.push(j);
                }
            }
        }
        if (reached != n)
            throw Error(ErrorCode::invalid_argument,
                        "islanded network: tripping line " +
                            std::to_string(grid.fault.tripped_line.first) + "-" +
                            std::to_string(grid.fault.tripped_line.second) + " strands " +
                            std::to_string(n - reached) + " bus(es)");
    }

    return ybus;
}

namespace {

struct BusInjections {
    Eigen::VectorXd load_p;  // pu consumption per bus
    Eigen::VectorXd load_q;
    Eigen::VectorXd wind_p;  // pu injection per bus
};

BusInjections collect_injections(const GridCase& grid, const ScenarioInjections& injections) {
    const int n = grid.bus_count();
    BusInjections out;
    out.load_p = Eigen::VectorXd::Zero(n);
    out.load_q = Eigen::VectorXd::Zero(n);
    out.wind_p = Eigen::VectorXd::Zero(n);
    const double base = grid.system_mva_base;
    for (const auto& l : grid.loads) {
        const int i = grid.bus_index(l.bus);
        auto it = injections.load_overrides.find(l.bus);
        const double p = it != injections.load_overrides.end() ? it->second.p_mw
                                                              : l.base_active_power;
        const double q = it != injections.load_overrides.end() ? it->second.q_mvar
                                                               : l.base_reactive_power;
        out.load_p[i] += p / base;
        out.load_q[i] += q / base;
    }
    for (const auto& [bus, p_mw] : injections.wind_mw) {
        out.wind_p[grid.bus_index(bus)] += p_mw / base;
    }
    for (const auto& [bus, pq] : injections.load_overrides) {
        if (!std::isfinite(pq.p_mw) || !std::isfinite(pq.q_mvar))
            throw Error(ErrorCode::invalid_argument,
                        "non-finite load override at bus " + std::to_string(bus));
        bool known = false;
        for (const auto& l : grid.loads) known = known || l.bus == bus;
        if (!known)
            throw Error(ErrorCode::invalid_argument,
                        "load override at bus " + std::to_string(bus) + " without a load");
    }
    for (const auto& [bus, p_mw] : injections.wind_mw) {
        if (!std::isfinite(p_mw))
            throw Error(ErrorCode::invalid_argument,
                        "non-finite wind injection at bus " + std::to_string(bus));
    }
    return out;
}

}  // namespace

PowerFlowSolution solve_power_flow(const GridCase& grid, const ScenarioInjections& injections,
                                   const PowerFlowOptions& options) {
    const int n = grid.bus_count();
    const AdmittanceMatrix ybus = build_ybus(grid, TopologyVariant::pre_fault);
    const Eigen::MatrixXd G = ybus.entries.real();
    const Eigen::MatrixXd B = ybus.entries.imag();
    const BusInjections inj = collect_injections(grid, injections);

    // scheduled net injections; slack P and pv/slack Q stay unknown
    Eigen::VectorXd p_sched = inj.wind_p - inj.load_p;
    Eigen::VectorXd q_sched = -inj.load_q;
    int slack = -1;
    for (const auto& g : grid.generators) {
        const int i = grid.bus_index(g.bus);
        if (grid.buses[i].kind == BusKind::pv) p_sched[i] += g.mechanical_power;
    }
    std::vector<int> p_rows, q_rows;  // bus indices carrying P / Q mismatch equations
    for (int i = 0; i < n; ++i) {
        switch (grid.buses[i].kind) {
            case BusKind::slack: slack = i; break;
            case BusKind::pv: p_rows.push_back(i); break;
            case BusKind::pq:
                p_rows.push_back(i);
                q_rows.push_back(i);
                break;
        }
    }
    const int np = static_cast<int>(p_rows.size());
    const int nq = static_cast<int>(q_rows.size());

    Eigen::VectorXd vm(n), va = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const BusSpec& b = grid.buses[i];
        vm[i] = b.kind == BusKind::pq ? b.base_voltage_magnitude : b.voltage_setpoint;
    }

    auto calc_power = [&](Eigen::VectorXd& p, Eigen::VectorXd& q) {
        p.setZero(n);
        q.setZero(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (G(i, j) == 0.0 && B(i, j) == 0.0) continue;
                const double th = va[i] - va[j];
                const double c = std::cos(th), s = std::sin(th);
                p[i] += vm[i] * vm[j] * (G(i, j) * c + B(i, j) * s);
                q[i] += vm[i] * vm[j] * (G(i, j) * s - B(i, j) * c);
            }
        }
    };

    Eigen::VectorXd p_calc(n), q_calc(n);
    double max_mismatch = 0.0;
    int iterations = 0;
    bool converged = false;

    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        calc_power(p_calc, q_calc);
        Eigen::VectorXd mismatch(np + nq);
        for (int k = 0; k < np; ++k) mismatch[k] = p_sched[p_rows[k]] - p_calc[p_rows[k]];
        for (int k = 0; k < nq; ++k) mismatch[np + k] = q_sched[q_rows[k]] - q_calc[q_rows[k]];
        max_mismatch = mismatch.size() ? mismatch.cwiseAbs().maxCoeff() : 0.0;
        if (!std::isfinite(max_mismatch))
            throw PowerFlowDiverged(max_mismatch, iterations);
        if (max_mismatch <= options.tolerance) {
            converged = true;
            break;
        }
        if (iter == options.max_iterations) break;

        Eigen::MatrixXd jac(np + nq, np + nq);
        for (int a = 0; a < np; ++a) {
            const int i = p_rows[a];
            for (int b = 0; b < np; ++b) {
                const int j = p_rows[b];
                if (i == j) {
                    jac(a, b) = -q_calc[i] - B(i, i) * vm[i] * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(a, b) = vm[i] * vm[j] * (G(i, j) * std::sin(th) - B(i, j) * std::cos(th));
                }
            }
            for (int b = 0; b < nq; ++b) {
                const int j = q_rows[b];
                if (i == j) {
                    jac(a, np + b) = p_calc[i] / vm[i] + G(i, i) * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(a, np + b) = vm[i] * (G(i, j) * std::cos(th) + B(i, j) * std::sin(th));
                }
            }
        }
        for (int a = 0; a < nq; ++a) {
            const int i = q_rows[a];
            for (int b = 0; b < np; ++b) {
                const int j = p_rows[b];
                if (i == j) {
                    jac(np + a, b) = p_calc[i] - G(i, i) * vm[i] * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(np + a, b) = -vm[i] * vm[j] * (G(i, j) * std::cos(th) + B(i, j) * std::sin(th));
                }
            }
            for (int b = 0; b < nq; ++b) {
                const int j = q_rows[b];
                if (i == j) {
                    jac(np + a, np + b) = q_calc[i] / vm[i] - B(i, i) * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(np + a, np + b) = vm[i] * (G(i, j) * std::sin(th) - B(i, j) * std::cos(th));
                }
            }
        }

        const Eigen::VectorXd step = jac.partialPivLu().solve(mismatch);
        if (!step.allFinite()) throw PowerFlowDiverged(max_mismatch, iterations);
        for (int k = 0; k < np; ++k) va[p_rows[k]] += step[k];
        for (int k = 0; k < nq; ++k) vm[q_rows[k]] += step[np + k];
        ++iterations;
    }

    if (!converged) throw PowerFlowDiverged(max_mismatch, iterations);

    PowerFlowSolution sol;
    sol.voltage_magnitudes = vm;
    sol.voltage_angles = va;
    sol.converged = true;
    sol.max_mismatch = max_mismatch;
    sol.iterations = iterations;
    sol.slack_p_mw = (p_calc[slack] + inj.load_p[slack] - inj.wind_p[slack]) * grid.system_mva_base;
    sol.slack_q_mvar = (q_calc[slack] + inj.load_q[slack]) * grid.system_mva_base;

    const int ng = static_cast<int>(grid.generators.size());
    sol.gen_active_power.resize(ng);
    sol.gen_reactive_power.resize(ng);
    for (int k = 0; k < ng; ++k) {
        const GeneratorSpec& g = grid.generators[k];
        const int i = grid.bus_index(g.bus);
        if (grid.buses[i].kind == BusKind::slack) {
            sol.gen_active_power[k] = p_calc[i] + inj.load_p[i] - inj.wind_p[i];
        } else {
            sol.gen_active_power[k] = g.mechanical_power;
        }
        sol.gen_reactive_power[k] = q_calc[i] + inj.load_q[i];
    }
    return sol;
}

Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& full, const std::vector<int>& eliminate) {
    const int n = static_cast<int>(full.rows());
    if (full.cols() != n) throw Error(ErrorCode::invalid_argument, "matrix must be square");
    std::vector<char> is_elim(n, 0);
    for (int i : eliminate) {
        if (i < 0 || i >= n)
            throw Error(ErrorCode::invalid_argument, "eliminated index out of range");
        if (is_elim[i]) throw Error(ErrorCode::invalid_argument, "duplicate eliminated index");
        is_elim[i] = 1;
    }
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (!is_elim[i]) keep.push_back(i);
    const int nk = static_cast<int>(keep.size());
    const int ne = n - nk;
    if (ne == 0) return full;

    Eigen::MatrixXcd y_kk(nk, nk), y_ke(nk, ne), y_ek(ne, nk), y_ee(ne, ne);
    std::vector<int> elim_sorted;
    for (int i = 0; i < n; ++i)
        if (is_elim[i]) elim_sorted.push_back(i);
    for (int a = 0; a < nk; ++a) {
        for (int b = 0; b < nk; ++b) y_kk(a, b) = full(keep[a], keep[b]);
        for (int b = 0; b < ne; ++b) y_ke(a, b) = full(keep[a], elim_sorted[b]);
    }
    for (int a = 0; a < ne; ++a) {
        for (int b = 0; b < nk; ++b) y_ek(a, b) = full(elim_sorted[a], keep[b]);
        for (int b = 0; b < ne; ++b) y_ee(a, b) = full(elim_sorted[a], elim_sorted[b]);
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(y_ee);
    if (!lu.isInvertible())
        throw Error(ErrorCode::numerical, "degenerate network: eliminated block is singular");
    return y_kk - y_ke * lu.solve(y_ek);
}

ReducedNetwork reduce_to_internal_nodes(const GridCase& grid, const PowerFlowSolution& pf,
                                        const ScenarioInjections& injections) {
    if (!pf.converged)
        throw Error(ErrorCode::invalid_argument, "reduction requires a converged power flow");
    const int n = grid.bus_count();
    const int ng = static_cast<int>(grid.generators.size());
    if (ng == 0) throw Error(ErrorCode::invalid_argument, "case has no generators");
    if (pf.gen_active_power.size() != ng)
        throw Error(ErrorCode::invalid_argument, "power flow solution does not match the case");

    const BusInjections inj = collect_injections(grid, injections);

    Eigen::VectorXcd v_bus(n);
    for (int i = 0; i < n; ++i)
        v_bus[i] = std::polar(pf.voltage_magnitudes[i], pf.voltage_angles[i]);

    ReducedNetwork red;
    red.nominal_frequency = grid.fault.nominal_frequency;
    red.internal_emf_magnitudes.resize(ng);
    red.initial_rotor_angles.resize(ng);
    red.inertia_coefficients.resize(ng);
    red.damping.resize(ng);

    Eigen::VectorXcd gen_admittance(ng);
    for (int k = 0; k < ng; ++k) {
        const GeneratorSpec& g = grid.generators[k];
        const cd v = v_bus[grid.bus_index(g.bus)];
        const cd s(pf.gen_active_power[k], pf.gen_reactive_power[k]);
        const cd i_gen = std::conj(s / v);
        const cd e = v + cd(0.0, g.transient_reactance_xd_prime) * i_gen;
        red.internal_emf_magnitudes[k] = std::abs(e);
        red.initial_rotor_angles[k] = std::arg(e);
        const double base_ratio = g.mva_base / grid.system_mva_base;
        red.inertia_coefficients[k] = 2.0 * g.inertia_constant_H * base_ratio;
        red.damping[k] = g.damping_D * base_ratio;
        gen_admittance[k] = 1.0 / cd(0.0, g.transient_reactance_xd_prime);
    }

    // loads and wind as constant shunt admittances at the solved voltages
    Eigen::VectorXcd shunts(n);
    for (int i = 0; i < n; ++i) {
        const double v2 = pf.voltage_magnitudes[i] * pf.voltage_magnitudes[i];
        shunts[i] = cd(inj.load_p[i] - inj.wind_p[i], -inj.load_q[i]) / v2;
    }

    std::vector<int> eliminate(n);
    for (int i = 0; i < n; ++i) eliminate[i] = i;

    auto reduce_variant = [&](TopologyVariant variant) {
        const AdmittanceMatrix ybus = build_ybus(grid, variant);
        Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(n + ng, n + ng);
        aug.topLeftCorner(n, n) = ybus.entries;
        for (int i = 0; i < n; ++i) aug(i, i) += shunts[i];
        for (int k = 0; k < ng; ++k) {
            const int b = grid.bus_index(grid.generators[k].bus);
            const int m = n + k;
            aug(b, b) += gen_admittance[k];
            aug(m, m) += gen_admittance[k];
            aug(b, m) -= gen_admittance[k];
            aug(m, b) -= gen_admittance[k];
        }
        AdmittanceMatrix out;
        out.dimension = ng;
        out.entries = kron_reduce(aug, eliminate);
        return out;
    };

    red.pre_fault = reduce_variant(TopologyVariant::pre_fault);
    red.fault_on = reduce_variant(TopologyVariant::fault_on);
    red.post_fault = reduce_variant(TopologyVariant::post_fault);

    // lossless governor-free equilibrium: P_m matches pre-fault electrical power
    red.mechanical_powers.resize(ng);
    const Eigen::MatrixXcd& y = red.pre_fault.entries;
    for (int i = 0; i < ng; ++i) {
        double pe = 0.0;
        for (int j = 0; j < ng; ++j) {
            const double dij = red.initial_rotor_angles[i] - red.initial_rotor_angles[j];
            pe += red.internal_emf_magnitudes[i] * red.internal_emf_magnitudes[j] *
                  (y(i, j).real() * std::cos(dij) + y(i, j).imag() * std::sin(dij));
        }
        red.mechanical_powers[i] = pe;
    }

    return red;
}

GridCase GridCase::from_json(const nlohmann::json& j) {
    try {
        GridCase grid;
        grid.system_mva_base = j.value("system_mva_base", 100.0);
        for (const auto& jb : j.at("buses")) {
            BusSpec b;
            b.id = jb.at("id").get<int>();
            const std::string kind = jb.at("kind").get<std::string>();
            if (kind == "slack") {
                b.kind = BusKind::slack;
            } else if (kind == "pv") {
                b.kind = BusKind::pv;
            } else if (kind == "pq") {
                b.kind = BusKind::pq;
            } else {
                throw Error(ErrorCode::parse, "unknown bus kind '" + kind + "'");
            }
            b.base_voltage_magnitude = jb.value("base_voltage_magnitude", 1.0);
            b.voltage_setpoint = jb.value("voltage_setpoint", b.base_voltage_magnitude);
            grid.buses.push_back(b);
        }
        for (const auto& jl : j.at("lines")) {
            LineSpec l;
            l.from_bus = jl.at("from_bus").get<int>();
            l.to_bus = jl.at("to_bus").get<int>();
            l.series_resistance = jl.at("series_resistance").get<double>();
            l.series_reactance = jl.at("series_reactance").get<double>();
            l.shunt_susceptance = jl.value("shunt_susceptance", 0.0);
            l.tap_ratio = jl.value("tap_ratio", 1.0);
            l.in_service = jl.value("in_service", true);
            grid.lines.push_back(l);
        }
        for (const auto& jg : j.at("generators")) {
            GeneratorSpec g;
            g.bus = jg.at("bus").get<int>();
            g.inertia_constant_H = jg.at("inertia_constant_H").get<double>();
            g.damping_D = jg.value("damping_D", 0.0);
            g.transient_reactance_xd_prime = jg.at("transient_reactance_xd_prime").get<double>();
            g.mechanical_power = jg.value("mechanical_power", 0.0);
            g.mva_base = jg.value("mva_base", grid.system_mva_base);
            grid.generators.push_back(g);
        }
        for (const auto& jl : j.value("loads", nlohmann::json::array())) {
            LoadSpec l;
            l.bus = jl.at("bus").get<int>();
            l.base_active_power = jl.at("base_active_power").get<double>();
            l.base_reactive_power = jl.value("base_reactive_power", 0.0);
            grid.loads.push_back(l);
        }
        for (const auto& jw : j.value("wind_farms", nlohmann::json::array())) {
            WindFarmSpec w;
            w.bus = jw.at("bus").get<int>();
            w.rated_power = jw.at("rated_power").get<double>();
            w.v_in = jw.value("v_in", 3.0);
            w.v_out = jw.value("v_out", 25.0);
            w.v_r = jw.value("v_r", 11.4);
            w.P_r = jw.value("P_r", 1.5);
            grid.wind_farms.push_back(w);
        }
        const auto& jf = j.at("fault");
        grid.fault.faulted_bus = jf.at("faulted_bus").get<int>();
        grid.fault.fault_start_time = jf.value("fault_start_time", 0.1);
        const auto& jt = jf.at("tripped_line");
        grid.fault.tripped_line = {jt.at(0).get<int>(), jt.at(1).get<int>()};
        grid.fault.nominal_frequency = jf.value("nominal_frequency", 60.0);
        grid.validate();
        return grid;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("case file: ") + e.what());
    }
}

GridCase GridCase::from_json_file(const std::string& path) {
    return from_json(load_json_file(path));
}

nlohmann::json GridCase::to_json() const {
    nlohmann::json j;
    j["system_mva_base"] = system_mva_base;
    j["buses"] = nlohmann::json::array();
    for (const auto& b : buses) {
        const char* kind = b.kind == BusKind::slack ? "slack" : b.kind == BusKind::pv ? "pv" : "pq";
        j["buses"].push_back({{"id", b.id},
                              {"kind", kind},
                              {"base_voltage_magnitude", b.base_voltage_magnitude},
                              {"voltage_setpoint", b.voltage_setpoint}});
    }
    j["lines"] = nlohmann::json::array();
    for (const auto& l : lines) {
        j["lines"].push_back({{"from_bus", l.from_bus},
                              {"to_bus", l.to_bus},
                              {"series_resistance", l.series_resistance},
                              {"series_reactance", l.series_reactance},
                              {"shunt_susceptance", l.shunt_susceptance},
                              {"tap_ratio", l.tap_ratio},
                              {"in_service", l.in_service}});
    }
    j["generators"] = nlohmann::json::array();
    for (const auto& g : generators) {
        j["generators"].push_back({{"bus", g.bus},
                                   {"inertia_constant_H", g.inertia_constant_H},
                                   {"damping_D", g.damping_D},
                                   {"transient_reactance_xd_prime", g.transient_reactance_xd_prime},
                                   {"mechanical_power", g.mechanical_power},
                                   {"mva_base", g.mva_base}});
    }
    j["loads"] = nlohmann::json::array();
    for (const auto& l : loads) {
        j["loads"].push_back({{"bus", l.bus},
                              {"base_active_power", l.base_active_power},
                              {"base_reactive_power", l.base_reactive_power}});
    }
    j["wind_farms"] = nlohmann::json::array();
    for (const auto& w : wind_farms) {
        j["wind_farms"].push_back({{"bus", w.bus},
                                   {"rated_power", w.rated_power},
                                   {"v_in", w.v_in},
                                   {"v_out", w.v_out},
                                   {"v_r", w.v_r},
                                   {"P_r", w.P_r}});
    }
    j["fault"] = {{"faulted_bus", fault.faulted_bus},
                  {"fault_start_time", fault.fault_start_time},
                  {"tripped_line", {fault.tripped_line.first, fault.tripped_line.second}},
                  {"nominal_frequency", fault.nominal_frequency}};
    return j;
}

}  // namespace ptsa
