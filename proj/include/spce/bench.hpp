#ifndef SPCE_BENCH_HPP
#define SPCE_BENCH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <tuple>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "spce/basis.hpp"
#include "spce/design.hpp"
#include "spce/models.hpp"
#include "spce/selection.hpp"
#include "spce/solvers.hpp"

namespace spce {

struct BenchConfig {
    std::vector<std::string> models;
    std::vector<std::string> samplers;  // mc, lhs, asymptotic, coh-opt, d-opt, near-opt
    std::vector<std::string> solvers;
    std::map<std::string, std::vector<int>> ed_sizes;
    int replications{1};
    std::uint64_t master_seed{0};
    int n_validation{100000};
    bool small_basis{false};
    int cv_k{5};
    int jobs{1};

    static BenchConfig from_json(const nlohmann::json& j) {
        BenchConfig c;
        c.models = j.at("models").get<std::vector<std::string>>();
        c.samplers = j.at("samplers").get<std::vector<std::string>>();
        c.solvers = j.at("solvers").get<std::vector<std::string>>();
        for (auto& [name, sizes] : j.at("ed_sizes").items())
            c.ed_sizes[name] = sizes.get<std::vector<int>>();
        c.replications = j.value("replications", 1);
        c.master_seed = j.value("master_seed", std::uint64_t{0});
        c.n_validation = j.value("n_validation", 100000);
        c.small_basis = j.value("small_basis", false);
        c.cv_k = j.value("cv_k", 5);
        c.jobs = j.value("jobs", 1);
        c.validate();
        return c;
    }

    void validate() const {
        if (replications < 1) throw std::invalid_argument("config: replications >= 1 required");
        if (models.empty() || samplers.empty() || solvers.empty())
            throw std::invalid_argument("config: models, samplers, solvers must be nonempty");
        for (const auto& m : models) {
            model_by_name(m);  // throws for unknown models
            auto it = ed_sizes.find(m);
            if (it == ed_sizes.end() || it->second.empty())
                throw std::invalid_argument("config: ed_sizes missing for model " + m);
            for (std::size_t i = 1; i < it->second.size(); ++i)
                if (it->second[i] <= it->second[i - 1])
                    throw std::invalid_argument("config: ed_sizes must be strictly increasing");
        }
        for (const auto& s : solvers) solver_from_name(s);
        for (const auto& s : samplers)
            if (s != "mc" && s != "lhs" && s != "asymptotic" && s != "coh-opt" &&
                s != "d-opt" && s != "near-opt")
                throw std::invalid_argument("config: unknown sampler " + s);
    }
};

struct BenchRecord {
    std::string model, sampler, solver;
    int n{0};
    int replication{0};
    double relmse{0.0};
    int n_active{0};
    double cv_error{0.0};
    double wall_ms{0.0};
    std::uint64_t seed{0};
};

namespace detail {

inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Sparse surrogate prediction: evaluates only the active basis terms.
inline Eigen::VectorXd predict(const MultiIndexSet& indexset,
                               const std::vector<PolyFamily>& families,
                               const SparseSolution& sol, const Eigen::MatrixXd& points_std) {
    const int d = indexset.dim;
    const int n = static_cast<int>(points_std.rows());
    std::vector<int> pmax(d, 0);
    for (int j : sol.active_set)
        for (int k = 0; k < d; ++k) pmax[k] = std::max(pmax[k], indexset.indices[j][k]);
    std::vector<std::vector<double>> table(d);
    for (int k = 0; k < d; ++k) table[k].resize(pmax[k] + 1);
    Eigen::VectorXd yhat(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k)
            univariate_eval_all(families[k], pmax[k], points_std(i, k), table[k].data());
        double acc = 0.0;
        for (int j : sol.active_set) {
            double v = sol.coefficients[j];
            const auto& a = indexset.indices[j];
            for (int k = 0; k < d; ++k)
                if (a[k] != 0) v *= table[k][a[k]];
            acc += v;
        }
        yhat[i] = acc;
    }
    return yhat;
}

}  // namespace detail

/// Runs the full (model x sampler x N x replication x solver) grid. Every
/// solver in a cell sees the identical experimental design (seed derived
/// from master, model, sampler, N, replication — not the solver). Solver
/// failures become error records (relmse = inf); the run continues.
inline std::vector<BenchRecord> run(const BenchConfig& config) {
    config.validate();

    struct Cell {
        int model_i, sampler_i, size_i, rep;
    };
    std::vector<Cell> cells;
    std::vector<BenchmarkModel> models;
    for (const auto& name : config.models) models.push_back(model_by_name(name));
    for (int mi = 0; mi < static_cast<int>(models.size()); ++mi)
        for (int si = 0; si < static_cast<int>(config.samplers.size()); ++si)
            for (int ni = 0; ni < static_cast<int>(config.ed_sizes.at(models[mi].name).size()); ++ni)
                for (int rep = 0; rep < config.replications; ++rep)
                    cells.push_back({mi, si, ni, rep});

    // Per-model basis and candidate pools (for the subset samplers), plus
    // per-(model, replication) validation sets — built up-front, single-threaded.
    struct ModelCtx {
        MultiIndexSet indexset;
        std::vector<PolyFamily> families;
        CandidatePool pool;  // coh-opt pool shared by d-opt / near-opt
        bool has_pool{false};
    };
    std::vector<ModelCtx> ctx(models.size());
    bool needs_pool = false;
    for (const auto& s : config.samplers)
        if (s == "d-opt" || s == "near-opt") needs_pool = true;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const auto& m = models[mi];
        int p = config.small_basis ? m.p_small : m.p_default;
        ctx[mi].indexset = enumerate_truncation(m.d, TruncationSpec(p, m.q));
        ctx[mi].families = poly_families_for(m.input);
        if (needs_pool) {
            RngStream pool_rng(derive_seed(config.master_seed, m.name, "pool", 0, 0));
            ctx[mi].pool = build_candidate_pool(SamplerKind::CoherenceOptimal, m.input,
                                                ctx[mi].indexset, pool_rng);
            ctx[mi].has_pool = true;
        }
    }

    // Fresh validation set per (model, replication).
    std::map<std::pair<int, int>, std::pair<Eigen::MatrixXd, Eigen::VectorXd>> validation;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        for (int rep = 0; rep < config.replications; ++rep) {
            RngStream vrng(derive_seed(config.master_seed, models[mi].name, "validation",
                                       config.n_validation, rep));
            Eigen::MatrixXd xv = models[mi].input.sample_iid(config.n_validation, vrng);
            Eigen::VectorXd yv(config.n_validation);
            for (int i = 0; i < config.n_validation; ++i)
                yv[i] = models[mi].evaluate(xv.row(i).transpose());
            validation[{static_cast<int>(mi), rep}] = {models[mi].input.to_standard(xv),
                                                       std::move(yv)};
        }
    }

    std::vector<BenchRecord> records;
    std::mutex mtx;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t ci = next.fetch_add(1);
            if (ci >= cells.size()) return;
            const Cell& cell = cells[ci];
            const auto& m = models[cell.model_i];
            const auto& mc = ctx[cell.model_i];
            const std::string& sampler = config.samplers[cell.sampler_i];
            const int n = config.ed_sizes.at(m.name)[cell.size_i];
            const std::uint64_t seed =
                derive_seed(config.master_seed, m.name, sampler, n, cell.rep);

            std::vector<BenchRecord> local;
            try {
                RngStream rng(seed);
                Design design;
                if (sampler == "mc") {
                    design = mc_design(m.input, n, rng);
                } else if (sampler == "lhs") {
                    design = lhs_maximin(m.input, n, 20, rng);
                } else if (sampler == "asymptotic") {
                    design = asymptotic_design(m.input, mc.indexset.spec.p, n, rng);
                } else if (sampler == "coh-opt") {
                    design = coherence_optimal_design(m.input, mc.indexset, mc.families, n, rng);
                } else {  // d-opt / near-opt on a coh-opt candidate pool
                    Design cand = draw_m(mc.pool, rng);
                    Eigen::MatrixXd psi_cand = assemble(mc.families, mc.indexset,
                                                        cand.points_standard);
                    if (cand.weighted()) psi_cand = cand.weights.asDiagonal() * psi_cand;
                    design = sampler == "d-opt" ? d_optimal_rrqr(cand, psi_cand, n)
                                                : near_optimal_greedy(cand, psi_cand, n, rng);
                }

                Eigen::MatrixXd psi = assemble(mc.families, mc.indexset, design.points_standard);
                Eigen::VectorXd y(n);
                for (int i = 0; i < n; ++i)
                    y[i] = m.evaluate(design.points_physical.row(i).transpose());
                RegressionProblem problem(psi, y, design.weights);
                const auto& val = validation.at({cell.model_i, cell.rep});

                for (const auto& solver_name_ : config.solvers) {
                    BenchRecord rec;
                    rec.model = m.name;
                    rec.sampler = sampler;
                    rec.solver = solver_name_;
                    rec.n = n;
                    rec.replication = cell.rep;
                    rec.seed = seed;
                    auto t0 = std::chrono::steady_clock::now();
                    try {
                        SparseSolution sol = solve_with_hyperparameters(
                            solver_from_name(solver_name_), problem,
                            CvSpec::kfold(config.cv_k, seed));
                        Eigen::VectorXd yhat =
                            detail::predict(mc.indexset, mc.families, sol, val.first);
                        rec.relmse = relmse_values(val.second, yhat);
                        rec.n_active = static_cast<int>(sol.active_set.size());
                        rec.cv_error = sol.cv_error;
                    } catch (const std::exception& e) {
                        rec.relmse = std::numeric_limits<double>::infinity();
                        rec.n_active = 0;
                        rec.cv_error = std::numeric_limits<double>::infinity();
                        std::lock_guard<std::mutex> lk(mtx);
                        std::cerr << "bench: cell (" << m.name << "," << sampler << ",N=" << n
                                  << ",rep=" << cell.rep << "," << solver_name_
                                  << ") failed: " << e.what() << "\n";
                    }
                    rec.wall_ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - t0)
                                      .count();
                    local.push_back(std::move(rec));
                }
            } catch (const std::exception& e) {
                // design/model failure: error record per solver
                std::lock_guard<std::mutex> lk(mtx);
                std::cerr << "bench: design for (" << m.name << "," << sampler << ",N=" << n
                          << ",rep=" << cell.rep << ") failed: " << e.what() << "\n";
                for (const auto& solver_name_ : config.solvers) {
                    BenchRecord rec;
                    rec.model = m.name;
                    rec.sampler = sampler;
                    rec.solver = solver_name_;
                    rec.n = n;
                    rec.replication = cell.rep;
                    rec.seed = seed;
                    rec.relmse = std::numeric_limits<double>::infinity();
                    rec.cv_error = std::numeric_limits<double>::infinity();
                    local.push_back(std::move(rec));
                }
            }
            std::lock_guard<std::mutex> lk(mtx);
            for (auto& r : local) records.push_back(std::move(r));
        }
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Deterministic order regardless of scheduling.
    auto pos = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) - v.begin();
    };
    std::sort(records.begin(), records.end(), [&](const BenchRecord& a, const BenchRecord& b) {
        if (a.model != b.model) return pos(config.models, a.model) < pos(config.models, b.model);
        if (a.sampler != b.sampler)
            return pos(config.samplers, a.sampler) < pos(config.samplers, b.sampler);
        if (a.n != b.n) return a.n < b.n;
        if (a.replication != b.replication) return a.replication < b.replication;
        return pos(config.solvers, a.solver) < pos(config.solvers, b.solver);
    });
    return records;
}

// ---------------------------------------------------------------------------
// records.csv I/O
// ---------------------------------------------------------------------------

inline void write_records_csv(const std::vector<BenchRecord>& records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "model,sampler,solver,N,replication,relmse,n_active,cv_error,wall_ms,seed\n";
    for (const auto& r : records) {
        f << r.model << ',' << r.sampler << ',' << r.solver << ',' << r.n << ','
          << r.replication << ',' << detail::format_double(r.relmse) << ',' << r.n_active << ','
          << detail::format_double(r.cv_error) << ',' << detail::format_double(r.wall_ms) << ','
          << r.seed << "\n";
    }
}

inline std::vector<BenchRecord> read_records_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty records file: " + path);
    std::vector<BenchRecord> records;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        BenchRecord r;
        std::getline(ss, r.model, ',');
        std::getline(ss, r.sampler, ',');
        std::getline(ss, r.solver, ',');
        std::getline(ss, tok, ',');
        r.n = std::stoi(tok);
        std::getline(ss, tok, ',');
        r.replication = std::stoi(tok);
        std::getline(ss, tok, ',');
        r.relmse = std::stod(tok);
        std::getline(ss, tok, ',');
        r.n_active = std::stoi(tok);
        std::getline(ss, tok, ',');
        r.cv_error = std::stod(tok);
        std::getline(ss, tok, ',');
        r.wall_ms = std::stod(tok);
        std::getline(ss, tok, ',');
        r.seed = std::stoull(tok);
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Rank aggregation
// ---------------------------------------------------------------------------

enum class AggregateMode { SameEd, Paired };

/// Rank and robustness shares for one compared entity (a solver in same-ED
/// mode, a solver+sampler combination in paired mode).
struct EntityAggregate {
    std::string name;
    std::vector<double> rank_pct;          // share of cells at rank 1..S (percent)
    std::map<int, double> within_factor;   // f in {2,5,10} -> share of cells (percent)
    int cells{0};
};

struct AggregateTable {
    std::string split;  // "all", "small", "large"
    std::vector<EntityAggregate> entities;
};

namespace detail {

// Shared-minimum ranks of a value vector (1-based); infinities rank last.
inline std::vector<int> min_ranks(const std::vector<double>& v) {
    const int s = static_cast<int>(v.size());
    std::vector<int> ranks(s);
    for (int i = 0; i < s; ++i) {
        int r = 1;
        for (int j = 0; j < s; ++j)
            if (v[j] < v[i]) ++r;
        ranks[i] = r;
    }
    return ranks;
}

struct CellTally {
    std::vector<std::vector<long>> rank_counts;  // entity x rank
    std::vector<std::map<int, long>> within;     // entity -> factor -> count
    std::vector<long> cells;

    explicit CellTally(int entities)
        : rank_counts(entities, std::vector<long>(entities, 0)), within(entities),
          cells(entities, 0) {}

    void add(const std::vector<double>& errs) {
        auto ranks = min_ranks(errs);
        double best = *std::min_element(errs.begin(), errs.end());
        for (std::size_t e = 0; e < errs.size(); ++e) {
            ++rank_counts[e][ranks[e] - 1];
            ++cells[e];
            for (int f : {2, 5, 10})
                if (std::isfinite(errs[e]) && std::isfinite(best) && errs[e] <= f * best)
                    ++within[e][f];
        }
    }
};

}  // namespace detail

/// Rank-percentage and robustness aggregation. In same-ED mode, solvers are
/// compared per (model, sampler, N, replication) — all on the identical
/// design. In paired mode, (solver, sampler) combinations are compared per
/// (model, N) with replications matched by seeded random permutation,
/// bootstrapped 4 times. Percentages are normalized per model first, so
/// each model contributes equally.
inline std::vector<AggregateTable> aggregate_ranks(const std::vector<BenchRecord>& records,
                                                   AggregateMode mode,
                                                   std::uint64_t pairing_seed = 0) {
    if (records.empty()) return {};
    std::vector<std::string> models, entities;
    auto push_unique = [](std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    for (const auto& r : records) {
        push_unique(models, r.model);
        push_unique(entities,
                    mode == AggregateMode::SameEd ? r.solver : r.solver + "+" + r.sampler);
    }
    const int ne = static_cast<int>(entities.size());
    auto entity_of = [&](const BenchRecord& r) {
        std::string key = mode == AggregateMode::SameEd ? r.solver : r.solver + "+" + r.sampler;
        return static_cast<int>(std::find(entities.begin(), entities.end(), key) -
                                entities.begin());
    };

    // Small/large ED split per model: first ceil(half) of the sorted sizes.
    std::map<std::string, std::set<int>> sizes;
    for (const auto& r : records) sizes[r.model].insert(r.n);
    std::map<std::string, std::set<int>> small_sizes;
    for (auto& [mname, sz] : sizes) {
        std::vector<int> v(sz.begin(), sz.end());
        std::size_t nsmall = (v.size() + 1) / 2;
        small_sizes[mname] = std::set<int>(v.begin(), v.begin() + nsmall);
    }

    auto build = [&](const std::string& split) {
        auto in_split = [&](const BenchRecord& r) {
            if (split == "all") return true;
            bool small = small_sizes[r.model].count(r.n) > 0;
            return split == "small" ? small : !small;
        };

        // per-model tallies
        std::map<std::string, detail::CellTally> tallies;
        for (const auto& mname : models) tallies.emplace(mname, detail::CellTally(ne));

        if (mode == AggregateMode::SameEd) {
            std::map<std::tuple<std::string, std::string, int, int>, std::vector<double>> cells;
            for (const auto& r : records) {
                if (!in_split(r)) continue;
                auto key = std::make_tuple(r.model, r.sampler, r.n, r.replication);
                auto& errs = cells[key];
                if (errs.empty()) errs.assign(ne, std::numeric_limits<double>::quiet_NaN());
                errs[entity_of(r)] = r.relmse;
            }
            for (auto& [key, errs] : cells) {
                bool complete = std::none_of(errs.begin(), errs.end(),
                                             [](double v) { return std::isnan(v); });
                if (!complete) {
                    std::cerr << "aggregate: incomplete cell excluded (model="
                              << std::get<0>(key) << ", N=" << std::get<2>(key) << ")\n";
                    continue;
                }
                tallies.at(std::get<0>(key)).add(errs);
            }
        } else {
            // (model, N) groups; entity columns are replication lists.
            std::map<std::pair<std::string, int>, std::vector<std::vector<double>>> groups;
            for (const auto& r : records) {
                if (!in_split(r)) continue;
                auto& g = groups[{r.model, r.n}];
                if (g.empty()) g.assign(ne, {});
                g[entity_of(r)].push_back(r.relmse);
            }
            for (auto& [key, g] : groups) {
                std::size_t reps = g[0].size();
                bool complete = std::all_of(g.begin(), g.end(),
                                            [&](const auto& v) { return v.size() == reps; });
                if (!complete || reps == 0) {
                    std::cerr << "aggregate: incomplete group excluded (model=" << key.first
                              << ", N=" << key.second << ")\n";
                    continue;
                }
                RngStream rng(fnv1a(key.first + "|" + std::to_string(key.second),
                                    pairing_seed ^ 0x51d9f3a7c2b4e681ULL));
                for (int boot = 0; boot < 4; ++boot) {
                    std::vector<std::vector<int>> perm(ne);
                    for (int e = 0; e < ne; ++e) {
                        perm[e].resize(reps);
                        std::iota(perm[e].begin(), perm[e].end(), 0);
                        rng.shuffle(perm[e]);
                    }
                    for (std::size_t t = 0; t < reps; ++t) {
                        std::vector<double> errs(ne);
                        for (int e = 0; e < ne; ++e) errs[e] = g[e][perm[e][t]];
                        tallies.at(key.first).add(errs);
                    }
                }
            }
        }

        // Average percentages across models (equal model contribution).
        AggregateTable table;
        table.split = split;
        for (int e = 0; e < ne; ++e) {
            EntityAggregate agg;
            agg.name = entities[e];
            agg.rank_pct.assign(ne, 0.0);
            for (int f : {2, 5, 10}) agg.within_factor[f] = 0.0;
            int models_with_data = 0;
            for (const auto& mname : models) {
                const auto& t = tallies.at(mname);
                if (t.cells[e] == 0) continue;
                ++models_with_data;
                for (int rk = 0; rk < ne; ++rk)
                    agg.rank_pct[rk] += 100.0 * t.rank_counts[e][rk] / t.cells[e];
                for (int f : {2, 5, 10}) {
                    auto it = t.within[e].find(f);
                    long c = it == t.within[e].end() ? 0 : it->second;
                    agg.within_factor[f] += 100.0 * c / t.cells[e];
                }
                agg.cells += static_cast<int>(t.cells[e]);
            }
            if (models_with_data > 0) {
                for (auto& v : agg.rank_pct) v /= models_with_data;
                for (auto& [f, v] : agg.within_factor) v /= models_with_data;
            }
            table.entities.push_back(std::move(agg));
        }
        return table;
    };

    return {build("all"), build("small"), build("large")};
}

inline nlohmann::json aggregates_to_json(const std::vector<AggregateTable>& tables,
                                         AggregateMode mode) {
    nlohmann::json out;
    out["mode"] = mode == AggregateMode::SameEd ? "same-ed" : "paired";
    out["tables"] = nlohmann::json::array();
    for (const auto& t : tables) {
        nlohmann::json jt;
        jt["split"] = t.split;
        jt["entities"] = nlohmann::json::array();
        for (const auto& e : t.entities) {
            nlohmann::json je;
            je["name"] = e.name;
            je["rank_pct"] = e.rank_pct;
            je["cells"] = e.cells;
            for (const auto& [f, v] : e.within_factor)
                je["within_factor"][std::to_string(f)] = v;
            jt["entities"].push_back(std::move(je));
        }
        out["tables"].push_back(std::move(jt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

namespace detail {

inline const char* palette(int i) {
    static const char* colors[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                                   "#66ccee", "#aa3377", "#bbbbbb", "#222222"};
    return colors[i % 8];
}

inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    double pos = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

}  // namespace detail

/// Per-model boxplot of log10(RelMSE) against N, grouped by solver.
inline void write_boxplot_svg(const std::vector<BenchRecord>& records, const std::string& model,
                              const std::string& path) {
    std::vector<int> ns;
    std::vector<std::string> solvers;
    std::map<std::pair<int, std::string>, std::vector<double>> data;
    for (const auto& r : records) {
        if (r.model != model || !std::isfinite(r.relmse) || r.relmse <= 0.0) continue;
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
        if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end())
            solvers.push_back(r.solver);
        data[{r.n, r.solver}].push_back(std::log10(r.relmse));
    }
    std::sort(ns.begin(), ns.end());
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (auto& [k, v] : data) {
        std::sort(v.begin(), v.end());
        if (first) {
            lo = v.front();
            hi = v.back();
            first = false;
        } else {
            lo = std::min(lo, v.front());
            hi = std::max(hi, v.back());
        }
    }
    if (first) {
        lo = -1;
        hi = 1;
    }
    if (hi - lo < 1e-9) hi = lo + 1.0;

    const double w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;
    const double pw = w - ml - mr, ph = h - mt - mb;
    auto ycoord = [&](double v) { return mt + ph * (hi - v) / (hi - lo); };

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    f << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='14'>" << model
      << ": log10(RelMSE) vs N</text>\n";
    f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << mt + ph
      << "' stroke='black'/>\n";
    f << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='" << mt + ph
      << "' stroke='black'/>\n";
    for (int tick = static_cast<int>(std::ceil(lo)); tick <= static_cast<int>(std::floor(hi));
         ++tick) {
        double y = ycoord(tick);
        f << "<line x1='" << ml - 4 << "' y1='" << y << "' x2='" << ml << "' y2='" << y
          << "' stroke='black'/><text x='" << ml - 8 << "' y='" << y + 4
          << "' text-anchor='end' font-size='10'>" << tick << "</text>\n";
    }
    const int ng = static_cast<int>(ns.size()), sg = static_cast<int>(solvers.size());
    const double group_w = pw / std::max(1, ng);
    const double box_w = 0.8 * group_w / std::max(1, sg);
    for (int gi = 0; gi < ng; ++gi) {
        double gx = ml + group_w * (gi + 0.5);
        f << "<text x='" << gx << "' y='" << h - mb + 20
          << "' text-anchor='middle' font-size='11'>" << ns[gi] << "</text>\n";
        for (int si = 0; si < sg; ++si) {
            auto it = data.find({ns[gi], solvers[si]});
            if (it == data.end()) continue;
            const auto& v = it->second;
            double q1 = detail::quantile_sorted(v, 0.25);
            double q2 = detail::quantile_sorted(v, 0.5);
            double q3 = detail::quantile_sorted(v, 0.75);
            double x = ml + group_w * gi + group_w * 0.1 + box_w * si + box_w * 0.1;
            double bw = box_w * 0.8;
            const char* col = detail::palette(si);
            f << "<line x1='" << x + bw / 2 << "' y1='" << ycoord(v.front()) << "' x2='"
              << x + bw / 2 << "' y2='" << ycoord(v.back()) << "' stroke='" << col << "'/>\n";
            f << "<rect x='" << x << "' y='" << ycoord(q3) << "' width='" << bw << "' height='"
              << std::max(1.0, ycoord(q1) - ycoord(q3)) << "' fill='" << col
              << "' fill-opacity='0.5' stroke='" << col << "'/>\n";
            f << "<line x1='" << x << "' y1='" << ycoord(q2) << "' x2='" << x + bw << "' y2='"
              << ycoord(q2) << "' stroke='" << col << "' stroke-width='2'/>\n";
        }
    }
    for (int si = 0; si < sg; ++si) {
        double y = mt + 14 * si;
        f << "<rect x='" << w - mr - 110 << "' y='" << y - 9 << "' width='10' height='10' fill='"
          << detail::palette(si) << "'/><text x='" << w - mr - 95 << "' y='" << y
          << "' font-size='11'>" << solvers[si] << "</text>\n";
    }
    f << "</svg>\n";
}

/// Stacked-bar rank chart with triangle robustness markers, one bar per
/// compared entity.
inline void write_rank_svg(const AggregateTable& table, const std::string& path) {
    const int ne = static_cast<int>(table.entities.size());
    const double w = std::max(480.0, 90.0 * ne + 140.0), h = 420;
    const double ml = 60, mt = 40, mb = 90, ph = h - mt - mb;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    f << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='14'>rank shares ("
      << table.split << " EDs)</text>\n";
    for (int p = 0; p <= 100; p += 25) {
        double y = mt + ph * (100 - p) / 100.0;
        f << "<text x='" << ml - 8 << "' y='" << y + 4
          << "' text-anchor='end' font-size='10'>" << p << "%</text>\n";
    }
    const double bar_w = 60;
    for (int e = 0; e < ne; ++e) {
        const auto& ent = table.entities[e];
        double x = ml + 20 + e * 90.0;
        double acc = 0.0;
        for (int rk = 0; rk < ne; ++rk) {
            double seg = ent.rank_pct[rk];
            if (seg <= 0.0) continue;
            double y0 = mt + ph * (100.0 - acc - seg) / 100.0;
            f << "<rect x='" << x << "' y='" << y0 << "' width='" << bar_w << "' height='"
              << ph * seg / 100.0 << "' fill='" << detail::palette(rk)
              << "' stroke='white' stroke-width='0.5'/>\n";
            acc += seg;
        }
        int fi = 0;
        static const char* reds[] = {"#67000d", "#cb181d", "#fb6a4a"};
        for (int fac : {2, 5, 10}) {
            auto it = ent.within_factor.find(fac);
            double v = it == ent.within_factor.end() ? 0.0 : it->second;
            double y = mt + ph * (100.0 - v) / 100.0;
            double cx = x + bar_w + 8 + 10 * fi;
            f << "<path d='M" << cx - 5 << ' ' << y + 4 << " L" << cx + 5 << ' ' << y + 4
              << " L" << cx << ' ' << y - 5 << " Z' fill='" << reds[fi] << "'/>\n";
            ++fi;
        }
        f << "<text x='" << x + bar_w / 2 << "' y='" << h - mb + 16
          << "' text-anchor='middle' font-size='10' transform='rotate(30 " << x + bar_w / 2
          << ' ' << h - mb + 16 << ")'>" << ent.name << "</text>\n";
    }
    f << "</svg>\n";
}

/// Writes records.csv, aggregates.json (same-ED mode), and the SVG plots.
inline void emit_outputs(const std::vector<BenchRecord>& records, const std::string& outdir) {
    write_records_csv(records, outdir + "/records.csv");
    auto tables = aggregate_ranks(records, AggregateMode::SameEd);
    std::ofstream ja(outdir + "/aggregates.json");
    if (!ja) throw std::runtime_error("cannot open " + outdir + "/aggregates.json");
    ja << aggregates_to_json(tables, AggregateMode::SameEd).dump(2) << "\n";
    std::vector<std::string> models;
    for (const auto& r : records)
        if (std::find(models.begin(), models.end(), r.model) == models.end())
            models.push_back(r.model);
    for (const auto& m : models)
        write_boxplot_svg(records, m, outdir + "/boxplot_" + m + ".svg");
    for (const auto& t : tables)
        write_rank_svg(t, outdir + "/ranks_" + t.split + ".svg");
}

}  // namespace spce

#endif
