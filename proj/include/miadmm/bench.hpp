#pragma once

// Benchmark harness: builds an application problem from a RunConfig, runs
// miADMM (and optionally the BCD baseline), and serializes histories and
// timing sweeps as CSV.

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "miadmm/miadmm.hpp"

namespace miadmm::bench {

/// Raised for unreadable or unwritable files; the CLI maps it to exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

/// Raised for invalid run configurations; the CLI maps it to exit code 64.
class UsageError : public Error {
public:
    using Error::Error;
};

enum class Command { Synthetic, Multitask, SignedNetwork, DictLearn, Nmf };

inline constexpr int kExitConverged = 0;
inline constexpr int kExitMaxIter = 2;
inline constexpr int kExitCertificate = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitUsage = 64;

inline std::optional<Command> parse_command(std::string_view s) {
    if (s == "synthetic") return Command::Synthetic;
    if (s == "multitask") return Command::Multitask;
    if (s == "signed-network") return Command::SignedNetwork;
    if (s == "dictlearn") return Command::DictLearn;
    if (s == "nmf") return Command::Nmf;
    return std::nullopt;
}

inline const char* to_string(Command c) {
    switch (c) {
        case Command::Synthetic: return "synthetic";
        case Command::Multitask: return "multitask";
        case Command::SignedNetwork: return "signed-network";
        case Command::DictLearn: return "dictlearn";
        case Command::Nmf: return "nmf";
    }
    return "unknown";
}

/// Unset sizes and weights fall back to per-command defaults (see resolve()).
struct RunConfig {
    Command command = Command::Synthetic;
    std::optional<long> n;         // samples (synthetic N, per task/node, dictlearn/nmf columns)
    std::optional<long> m;         // synthetic M, nmf rows, signed-network edge count
    std::optional<long> tasks;     // multitask tasks, signed-network nodes
    std::optional<long> features;  // multitask/signed-network features, dictlearn rows
    std::optional<long> rank;      // dictlearn atoms, nmf inner dimension
    std::optional<double> lambda;
    std::optional<double> gamma;
    double rho = 0.1;
    double noise_sd = 0.1;
    std::size_t max_iter = 1000;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    std::string out;    // history CSV; empty for none
    std::string input;  // matrix fixture for dictlearn (X) or nmf (U)
    bool baseline = false;
    std::vector<long> sweep;
    char sweep_axis = 'n';
    bool record_timing = true;
};

/// A RunConfig with every size and weight filled in.
struct Resolved {
    long n = 0, m = 0, tasks = 0, features = 0, rank = 0;
    double lambda = 0.0, gamma = 0.0;
};

inline Resolved resolve(const RunConfig& c) {
    Resolved r;
    switch (c.command) {
        case Command::Synthetic:
            r.n = c.n.value_or(1000);
            r.m = c.m.value_or(1000);
            r.lambda = c.lambda.value_or(1.0);
            break;
        case Command::Multitask:
            r.tasks = c.tasks.value_or(5);
            r.features = c.features.value_or(10);
            r.n = c.n.value_or(50);
            r.lambda = c.lambda.value_or(0.1);
            break;
        case Command::SignedNetwork:
            r.tasks = c.tasks.value_or(4);
            r.features = c.features.value_or(5);
            r.n = c.n.value_or(40);
            r.m = c.m.value_or(r.tasks * r.features);
            r.lambda = c.lambda.value_or(0.1);
            break;
        case Command::DictLearn:
            r.features = c.features.value_or(8);
            r.n = c.n.value_or(20);
            r.rank = c.rank.value_or(4);
            r.gamma = c.gamma.value_or(0.1);
            break;
        case Command::Nmf:
            r.m = c.m.value_or(10);
            r.n = c.n.value_or(8);
            r.rank = c.rank.value_or(3);
            break;
    }
    return r;
}

inline void validate(const RunConfig& c) {
    if (!(c.rho > 0.0) || !std::isfinite(c.rho)) throw UsageError("--rho must be positive");
    if (!(c.tol > 0.0)) throw UsageError("--tol must be positive");
    if (c.max_iter < 1) throw UsageError("--max-iter must be at least 1");
    if (!(c.noise_sd >= 0.0)) throw UsageError("noise level must be nonnegative");
    for (const auto& v : {c.n, c.m, c.tasks, c.features, c.rank})
        if (v && *v < 1) throw UsageError("sizes must be positive");
    if (c.lambda && !(*c.lambda > 0.0)) throw UsageError("--lambda must be positive");
    if (c.gamma && !(*c.gamma >= 0.0)) throw UsageError("--gamma must be nonnegative");
    if (c.tasks && *c.tasks < 2 && (c.command == Command::Multitask || c.command == Command::SignedNetwork))
        throw UsageError("--tasks must be at least 2");
    if (!c.sweep.empty()) {
        if (c.command != Command::Synthetic) throw UsageError("--sweep is supported for synthetic only");
        if (c.sweep.size() < 3) throw UsageError("--sweep needs at least 3 values");
        for (std::size_t i = 0; i < c.sweep.size(); ++i) {
            if (c.sweep[i] < 1) throw UsageError("--sweep values must be positive");
            if (i && c.sweep[i] <= c.sweep[i - 1]) throw UsageError("--sweep values must be ascending");
        }
        if (c.sweep_axis != 'n' && c.sweep_axis != 'm') throw UsageError("--sweep-axis must be n or m");
    }
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("format_double failed");
    return {buf.data(), end};
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw IoError("bad number in CSV: " + std::string(s));
    return v;
}

inline Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return read_matrix(in);
    } catch (const InvalidArgument& e) {
        throw IoError(path + ": " + e.what());
    }
}

/// An application problem plus whatever is needed to report on its solution.
struct BuiltProblem {
    ProblemSpec spec;
    std::function<void(const SolverState&, std::ostream&)> extra_summary;
};

inline BuiltProblem build_problem(const RunConfig& c) {
    const Resolved r = resolve(c);
    BuiltProblem b;
    switch (c.command) {
        case Command::Synthetic: {
            const auto d = problems::gen_synthetic(r.n, r.m, c.noise_sd, c.seed);
            b.spec = problems::build_synthetic_problem(d, r.lambda);
            break;
        }
        case Command::Multitask:
            b.spec = problems::build_multitask_problem(
                problems::gen_multitask(static_cast<std::size_t>(r.tasks), r.features, r.n, r.lambda, c.seed));
            break;
        case Command::SignedNetwork: {
            const auto p = problems::gen_signed_network(static_cast<std::size_t>(r.tasks), r.features, r.n,
                                                        static_cast<std::size_t>(r.m), c.seed);
            b.spec = problems::build_signed_network_problem(p.net, p.data, r.lambda);
            break;
        }
        case Command::DictLearn: {
            problems::DictLearnProblem p = c.input.empty()
                                               ? problems::gen_dictlearn(r.features, r.n, r.rank, r.gamma, c.seed)
                                               : problems::DictLearnProblem{read_matrix_file(c.input), r.gamma, r.rank};
            if (p.atoms > std::min(p.X.rows(), p.X.cols())) throw UsageError("--rank exceeds the data dimensions");
            b.spec = problems::build_dictlearn_problem(p);
            break;
        }
        case Command::Nmf: {
            auto p = std::make_shared<problems::NmfProblem>(
                c.input.empty() ? problems::gen_nmf(r.m, r.n, r.rank, c.seed)
                                : problems::NmfProblem{read_matrix_file(c.input), r.rank});
            if ((p->U.array() < 0.0).any()) throw UsageError("nmf input must be nonnegative");
            b.spec = problems::build_nmf_problem(*p);
            b.extra_summary = [p](const SolverState& s, std::ostream& os) {
                os << " relative_error=" << format_double(problems::nmf_relative_error(*p, s.x));
            };
            break;
        }
    }
    return b;
}

inline SolverConfig solver_config(const RunConfig& c) {
    SolverConfig s;
    s.rho = c.rho;
    s.max_iter = c.max_iter;
    s.tol = c.tol;
    s.seed = c.seed;
    s.record_timing = c.record_timing;
    return s;
}

// ---------------------------------------------------------------- CSV

inline constexpr std::array<std::string_view, 10> kHistoryColumns = {
    "iter", "objective", "lagrangian", "primal_residual", "step_norm_sq",
    "u_k", "descent_lhs", "descent_rhs", "dual_identity_err", "wall_time_ms"};

inline void write_history_csv(std::span<const IterationRecord> history, std::ostream& os) {
    if (history.empty()) throw InvalidArgument("write_history_csv: empty history");
    for (std::size_t i = 0; i < kHistoryColumns.size(); ++i) os << (i ? "," : "") << kHistoryColumns[i];
    os << '\n';
    for (const auto& r : history) {
        os << r.k;
        for (double v : {r.objective, r.lagrangian, r.primal_residual, r.step_norm_sq, r.u_k, r.descent_lhs,
                         r.descent_rhs, r.dual_identity_err, r.wall_time_ms})
            os << ',' << format_double(v);
        os << '\n';
    }
}

inline void write_history_csv(std::span<const IterationRecord> history, const std::string& path) {
    if (history.empty()) throw InvalidArgument("write_history_csv: empty history");
    std::ostringstream buf;
    write_history_csv(history, buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << buf.str()) || !out.flush()) throw IoError("cannot write " + path);
}

inline std::vector<IterationRecord> read_history_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty history file");
    std::string header;
    for (std::size_t i = 0; i < kHistoryColumns.size(); ++i) (header += i ? "," : "") += kHistoryColumns[i];
    if (line != header) throw IoError("unexpected history header");
    std::vector<IterationRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view rest = line;
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
            f.push_back(rest.substr(0, pos));
        f.push_back(rest);
        if (f.size() != kHistoryColumns.size()) throw IoError("wrong field count in history row");
        IterationRecord r;
        auto [end, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.k);
        if (ec != std::errc{} || end != f[0].data() + f[0].size()) throw IoError("bad iteration index");
        double* fields[] = {&r.objective,   &r.lagrangian,  &r.primal_residual,   &r.step_norm_sq, &r.u_k,
                            &r.descent_lhs, &r.descent_rhs, &r.dual_identity_err, &r.wall_time_ms};
        for (std::size_t i = 0; i < 9; ++i) *fields[i] = parse_double(f[i + 1]);
        out.push_back(r);
    }
    return out;
}

inline std::vector<IterationRecord> read_history_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_history_csv(in);
}

/// foo.csv → foo.bcd.csv
inline std::string baseline_path(const std::string& out) {
    const auto dot = out.rfind('.');
    const auto slash = out.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".bcd";
    return out.substr(0, dot) + ".bcd" + out.substr(dot);
}

// ---------------------------------------------------------------- sweeps

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y ≈ a + b·x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("linear_fit: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("linear_fit: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

struct SweepRow {
    long value = 0;
    double miadmm_ms = 0.0;
    double bcd_ms = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    LinearFit miadmm_fit;
    LinearFit bcd_fit;
};

/// Times problem construction plus exactly max_iter iterations of each method
/// for every value of the swept axis (best of `repeats`).
inline SweepTable scaling_sweep(const RunConfig& base, char axis, std::span<const long> values, int repeats = 3) {
    if (values.size() < 3) throw UsageError("scaling sweep needs at least 3 values");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1]) throw UsageError("scaling sweep values must be ascending");
    if (axis != 'n' && axis != 'm') throw UsageError("sweep axis must be n or m");
    if (base.command != Command::Synthetic) throw UsageError("scaling sweep supports synthetic only");

    using clock = std::chrono::steady_clock;
    SweepTable t;
    for (long v : values) {
        RunConfig c = base;
        (axis == 'n' ? c.n : c.m) = v;
        const Resolved r = resolve(c);
        const auto data = problems::gen_synthetic(r.n, r.m, c.noise_sd, c.seed);
        SolverConfig sc = solver_config(c);
        sc.fixed_iterations = true;
        SweepRow row;
        row.value = v;
        row.miadmm_ms = row.bcd_ms = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < repeats; ++rep) {
            auto t0 = clock::now();
            {
                const auto spec = problems::build_synthetic_problem(data, r.lambda);
                (void)run(spec, sc);
            }
            row.miadmm_ms = std::min(row.miadmm_ms, std::chrono::duration<double, std::milli>(clock::now() - t0).count());
            t0 = clock::now();
            {
                const auto spec = problems::build_synthetic_problem(data, r.lambda);
                (void)problems::bcd_solve(spec, sc);
            }
            row.bcd_ms = std::min(row.bcd_ms, std::chrono::duration<double, std::milli>(clock::now() - t0).count());
        }
        t.rows.push_back(row);
    }
    std::vector<double> xs, ym, yb;
    for (const auto& row : t.rows) {
        xs.push_back(static_cast<double>(row.value));
        ym.push_back(row.miadmm_ms);
        yb.push_back(row.bcd_ms);
    }
    t.miadmm_fit = linear_fit(xs, ym);
    t.bcd_fit = linear_fit(xs, yb);
    return t;
}

inline void write_sweep_csv(const SweepTable& t, std::ostream& os) {
    os << "value,miadmm_ms,bcd_ms\n";
    for (const auto& r : t.rows) os << r.value << ',' << format_double(r.miadmm_ms) << ',' << format_double(r.bcd_ms) << '\n';
}

// ---------------------------------------------------------------- commands

inline int exit_code(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return kExitConverged;
        case SolveStatus::MaxIterReached: return kExitMaxIter;
        case SolveStatus::CertificateViolation: return kExitCertificate;
    }
    return kExitCertificate;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + path);
}

/// Runs one configured command, printing a key=value summary to `os`.
/// Errors are reported on `err` and mapped to exit codes.
inline int run_command(const RunConfig& cfg, std::ostream& os, std::ostream& err,
                       const IterationObserver& observer = {}) {
    try {
        validate(cfg);
        if (!cfg.sweep.empty()) {
            const SweepTable t = scaling_sweep(cfg, cfg.sweep_axis, cfg.sweep);
            if (!cfg.out.empty()) {
                std::ostringstream buf;
                write_sweep_csv(t, buf);
                write_text_file(cfg.out, buf.str());
            } else {
                write_sweep_csv(t, os);
            }
            os << "command=sweep axis=" << cfg.sweep_axis << " points=" << t.rows.size()
               << " r2_miadmm=" << format_double(t.miadmm_fit.r2) << " r2_bcd=" << format_double(t.bcd_fit.r2)
               << " slope_miadmm_ms=" << format_double(t.miadmm_fit.slope)
               << " slope_bcd_ms=" << format_double(t.bcd_fit.slope) << '\n';
            return kExitConverged;
        }

        const BuiltProblem built = build_problem(cfg);
        const SolverConfig sc = solver_config(cfg);
        const SolveReport rep = run(built.spec, sc, observer);
        if (!cfg.out.empty() && !rep.history.empty()) write_history_csv(rep.history, cfg.out);

        const IterationRecord last = rep.history.empty() ? IterationRecord{} : rep.history.back();
        os << "command=" << to_string(cfg.command) << " status=" << to_string(rep.status)
           << " iterations=" << rep.final.k << " objective=" << format_double(last.objective)
           << " lagrangian=" << format_double(last.lagrangian)
           << " primal_residual=" << format_double(last.primal_residual)
           << " wall_time_ms=" << format_double(last.wall_time_ms);
        if (built.extra_summary) built.extra_summary(rep.final, os);
        if (!rep.detail.empty()) os << " detail=\"" << rep.detail << '"';
        os << '\n';

        if (cfg.baseline) {
            const BuiltProblem again = build_problem(cfg);
            const SolveReport b = problems::bcd_solve(again.spec, sc);
            if (!cfg.out.empty() && !b.history.empty()) write_history_csv(b.history, baseline_path(cfg.out));
            const IterationRecord bl = b.history.empty() ? IterationRecord{} : b.history.back();
            os << "command=" << to_string(cfg.command) << "-bcd status=" << to_string(b.status)
               << " iterations=" << b.final.k << " objective=" << format_double(bl.objective)
               << " wall_time_ms=" << format_double(bl.wall_time_ms);
            if (again.extra_summary) again.extra_summary(b.final, os);
            os << '\n';
        }
        return exit_code(rep.status);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace miadmm::bench
