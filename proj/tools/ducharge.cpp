// ducharge: dual-unitary brickwork circuit analysis.
//
// Exit codes: 0 success / property holds, 1 property checked false,
// 2 usage or parse error, 3 resource limit, 4 numerically inconclusive.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ducharge/charges.hpp"
#include "ducharge/pauli.hpp"

using namespace ducharge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;
constexpr int kExitInconclusive = 4;

struct RunConfig {
    double tol = 1e-9;
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    void validate() const {
        if (!(tol > 0.0 && tol <= 1e-3)) throw contract_error("tol must lie in (0, 1e-3]");
    }
};

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw parse_error("cannot write " + name + " under " + dir);
    out << content;
}

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_make_gate(const std::string& kind, double theta, std::uint64_t seed, double J, bool has_j,
                  const std::string& out_path) {
    Gate g = [&] {
        if (kind == "fswap") return fswap();
        if (kind == "swap") return swap_gate(2);
        if (kind == "cz") return cz();
        if (kind == "phased-swap") return phased_swap(theta);
        if (kind == "random") return has_j ? random_dual_unitary_qubit(seed, J)
                                           : random_dual_unitary_qubit(seed);
        throw contract_error("unknown gate kind: " + kind);
    }();
    save_gate(g, out_path);
    std::cout << "wrote " << out_path << "\n";
    return kExitTrue;
}

int cmd_check_gate(const std::string& path, double tol) {
    Gate g = load_gate(path);
    json rep;
    rep["unitary"] = is_unitary(g, tol);
    rep["unitarity_residual"] = unitarity_residual(g);
    rep["duality_residual"] = duality_residual(g);
    rep["dual_unitary"] = is_dual_unitary(g, tol);
    std::cout << rep.dump(2) << "\n";
    return rep["dual_unitary"].get<bool>() ? kExitTrue : kExitFalse;
}

int cmd_find_solitons(const std::string& u_path, const std::string& v_path, int w,
                      const std::string& dir_name, double tol, const std::string& out_dir) {
    if (w < 1 || w % 2 == 0) throw contract_error("--w must be a positive odd integer");
    Direction dir = (dir_name == "minus") ? Direction::minus : Direction::plus;
    Gate U = load_gate(u_path), V = load_gate(v_path);
    Superoperator S = m_w(U, V, w, dir);
    std::vector<SolitonRecord> records = find_solitons(U, V, w, dir, tol);
    write_file(out_dir, "spectrum.csv", spectrum_csv(S));
    write_file(out_dir, "solitons.json", solitons_to_json(records));
    std::cout << "solitons: " << records.size() << " (w=" << w << ", direction=" << dir_name << ")\n";
    return kExitTrue;
}

int cmd_verify_charge(const std::string& charge_path, const std::string& u_path,
                      const std::string& v_path, int L, double tol) {
    Gate U = load_gate(u_path), V = load_gate(v_path);
    std::ifstream in(charge_path);
    if (!in) throw parse_error("cannot open " + charge_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ChargeRecord Q = charge_from_json(text);
    if (Q.chain_len != 2 * L) throw contract_error("charge chain_len does not match --L");
    FloquetOperator F = floquet(U, V, L);
    double resid = verify_conserved(F, Q);
    json rep;
    rep["residual"] = resid;
    rep["conserved"] = resid < tol;
    std::cout << rep.dump(2) << "\n";
    return resid < tol ? kExitTrue : kExitFalse;
}

int cmd_theorem1(const std::string& u_path, const std::string& v_path, int L, int w_max,
                 const std::string& out_dir) {
    Gate U = load_gate(u_path), V = load_gate(v_path);
    if (!is_dual_unitary(U) || !is_dual_unitary(V))
        throw contract_error("theorem1 requires dual-unitary gates");

    OracleResult oracle = brute_force_conserved_space(U, V, L, w_max);

    std::vector<ChargeRecord> soliton_charges;
    for (int w = 1; w <= w_max; w += 2) {
        for (Direction dir : {Direction::plus, Direction::minus}) {
            for (const auto& rec : find_solitons(U, V, w, dir)) {
                if (std::abs(std::pow(rec.lambda, L) - cx(1.0)) < 1e-8)
                    soliton_charges.push_back(charge_from_soliton(rec, L));
            }
        }
    }
    SpanComparison cmp = compare_charge_spans(oracle.basis, soliton_charges);

    double max_resid = 0.0;
    for (const auto& q : oracle.basis) {
        ChargeDecomposition dec = decompose_into_soliton_charges(U, V, q, w_max);
        max_resid = std::max(max_resid, dec.reconstruction_residual);
    }

    bool match = (cmp.dim_a == cmp.dim_b) && cmp.max_principal_angle < 1e-7 && max_resid < 1e-8;
    json rep;
    rep["oracle_dimension"] = cmp.dim_a;
    rep["soliton_charge_dimension"] = cmp.dim_b;
    rep["max_principal_angle"] = cmp.max_principal_angle;
    rep["max_decomposition_residual"] = max_resid;
    rep["gap_ratio"] = oracle.diagnostics.gap_ratio;
    rep["match"] = match;
    write_file(out_dir, "theorem1.json", rep.dump(2));
    std::cout << rep.dump(2) << "\n";
    return match ? kExitTrue : kExitFalse;
}

int cmd_scan(int count, std::uint64_t seed, int w_max, const std::string& out_dir) {
    if (count < 1) throw contract_error("--count must be >= 1");
    if (w_max < 1) throw contract_error("--w-max must be >= 1");
    const int L = 4;
    std::ostringstream csv;
    csv << "index,seed";
    for (int w = 1; w <= w_max; w += 2) csv << ",solitons_plus_w" << w << ",solitons_minus_w" << w;
    csv << ",charge_dim_L4,seconds\n";

    for (int i = 0; i < count; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        std::uint64_t gate_seed = seed + static_cast<std::uint64_t>(i);
        Gate g = random_dual_unitary_qubit(gate_seed);
        csv << i << "," << gate_seed;
        int charge_dim = 0;
        for (int w = 1; w <= w_max; w += 2) {
            for (Direction dir : {Direction::plus, Direction::minus}) {
                auto recs = find_solitons(g, g, w, dir);
                csv << "," << recs.size();
                for (const auto& r : recs)
                    if (std::abs(std::pow(r.lambda, L) - cx(1.0)) < 1e-8) ++charge_dim;
            }
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", wall_seconds(t0));
        csv << "," << charge_dim << "," << buf << "\n";
    }
    write_file(out_dir, "scan.csv", csv.str());
    std::cout << "scanned " << count << " gates -> " << (fs::path(out_dir) / "scan.csv").string() << "\n";
    return kExitTrue;
}

int cmd_fswap_demo(int w_extra, const std::string& gate_path, const std::string& out_dir) {
    Gate U = gate_path.empty() ? fswap() : load_gate(gate_path);
    json rep;
    auto fail = [&](const std::string& check) {
        rep["failed_check"] = check;
        write_file(out_dir, "fswap_demo.json", rep.dump(2));
        std::cout << rep.dump(2) << "\n";
        std::cerr << "demo check failed: " << check << "\n";
        return kExitFalse;
    };

    rep["dual_unitary"] = is_dual_unitary(U);
    if (!rep["dual_unitary"].get<bool>()) return fail("dual_unitary");

    // soliton census
    std::vector<int> widths = {1, 3};
    if (w_extra > 3 && w_extra % 2 == 1) widths.push_back(w_extra);
    for (int w : widths) {
        for (Direction dir : {Direction::plus, Direction::minus}) {
            auto recs = find_solitons(U, U, w, dir);
            std::string key = std::string("solitons_") + direction_name(dir) + "_w" + std::to_string(w);
            rep[key] = recs.size();
        }
    }

    // conserved charges on 2L = 8
    const int L = 4;
    FloquetOperator F = floquet(U, U, L);
    {
        auto recs = find_solitons(U, U, 1, Direction::plus);
        if (recs.empty()) return fail("width1_soliton_exists");
        ChargeRecord q = charge_from_soliton(recs.front(), L);
        write_file(out_dir, "width1_charge.json", charge_to_json(q));
        rep["sigma_z_charge_residual"] = verify_conserved(F, q);
        if (rep["sigma_z_charge_residual"].get<double>() > 1e-10) return fail("sigma_z_charge");
    }
    {
        // Σ_x over all sites of σ- σz σ- (the fermion-pair density)
        const auto& letters = site_letters(2);
        Matrix sm = 0.5 * (letters[1] - cx(0, 1) * letters[2]);
        LocalOperator dens{2, 3, kron(sm, kron(letters[3], sm))};
        std::vector<ChargeTerm> terms;
        for (int x = 0; x < 2 * L; ++x) terms.push_back({cx(1.0), x, dens});
        ChargeRecord q = make_charge(2 * L, std::move(terms));
        rep["fermion_pair_charge_residual"] = verify_conserved(F, q);
        if (rep["fermion_pair_charge_residual"].get<double>() > 1e-10) return fail("fermion_pair_charge");
    }

    // oracle equivalence at L = 4, w_max = 3
    {
        OracleResult oracle = brute_force_conserved_space(U, U, L, 3);
        std::vector<ChargeRecord> from_solitons;
        for (int w = 1; w <= 3; w += 2)
            for (Direction dir : {Direction::plus, Direction::minus})
                for (const auto& rec : find_solitons(U, U, w, dir))
                    if (std::abs(std::pow(rec.lambda, L) - cx(1.0)) < 1e-8)
                        from_solitons.push_back(charge_from_soliton(rec, L));
        SpanComparison cmp = compare_charge_spans(oracle.basis, from_solitons);
        rep["oracle_dimension"] = cmp.dim_a;
        rep["soliton_charge_dimension"] = cmp.dim_b;
        rep["span_max_principal_angle"] = cmp.max_principal_angle;
        double max_resid = 0.0;
        for (const auto& q : oracle.basis)
            max_resid = std::max(max_resid,
                                 decompose_into_soliton_charges(U, U, q, 3).reconstruction_residual);
        rep["max_decomposition_residual"] = max_resid;
        if (cmp.dim_a != cmp.dim_b || cmp.max_principal_angle > 1e-7 || max_resid > 1e-8)
            return fail("theorem1_equivalence");
    }

    // symbolic fermion checks (FSWAP tableau only)
    try {
        CliffordTableau tab = tableau_from_gate(U);
        PauliSum f0 = jw_fermion(0, FermionMode::semi_infinite);
        PauliSum cur = f0;
        bool ok = true;
        for (int t = 1; t <= 50 && ok; ++t) {
            cur = brickwork_step(tab, tab, cur, 1);
            ok = pauli_equal(cur, jw_fermion(2 * t, FermionMode::semi_infinite));
        }
        rep["fermion_translation_50_steps"] = ok;
        if (!ok) return fail("fermion_translation");

        int l = (w_extra > 3 && w_extra % 2 == 1) ? w_extra - 2 : 1;
        PauliSum F01 = fermion_pair(0, l);
        rep["pair_commutator_zero"] =
            commutator(F01, fermion_pair(2 * (l + 1), l)).empty();
        rep["anticommutator_zero"] =
            anticommutator(f0, jw_fermion(3, FermionMode::semi_infinite)).empty();
        PauliSum moved = brickwork_step(tab, tab, F01, 1);
        PauliSum expected = fermion_pair(2, l);
        rep["pair_translation"] = pauli_equal(moved, expected);
        if (!rep["pair_commutator_zero"].get<bool>() || !rep["anticommutator_zero"].get<bool>()
            || !rep["pair_translation"].get<bool>())
            return fail("fermion_pair_checks");
    } catch (const non_clifford_error&) {
        rep["clifford"] = false;  // non-Clifford input gate: symbolic checks skipped
    }

    write_file(out_dir, "fswap_demo.json", rep.dump(2));
    std::cout << rep.dump(2) << "\n";
    return kExitTrue;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-unitary brickwork circuit toolkit"};
    app.require_subcommand(1);
    RunConfig cfg;

    std::string kind = "fswap", out_path = "gate.json";
    double theta = 1.0, J = 0.0;
    bool has_j = false;
    auto* make = app.add_subcommand("make-gate", "write a gate file");
    make->add_option("kind", kind, "fswap|swap|cz|phased-swap|random");
    make->add_option("--theta", theta, "phase for phased-swap");
    make->add_option("--seed", cfg.seed, "seed for random gates");
    make->add_option("--J", J, "ZZ angle for random gates")->each([&](const std::string&) { has_j = true; });
    make->add_option("-o,--out", out_path, "output file");

    std::string gate_file, gate_file_v, charge_file;
    double tol = 1e-10;
    auto* check = app.add_subcommand("check-gate", "unitarity / dual-unitarity report");
    check->add_option("gate", gate_file)->required();
    check->add_option("--tol", tol, "residual tolerance (default 1e-10)");

    int w = 1, L = 4, w_max = 3, count = 20, demo_w = 3;
    std::string direction = "plus";
    auto* solitons = app.add_subcommand("find-solitons", "extract the width-w soliton set");
    solitons->add_option("gate_u", gate_file)->required();
    solitons->add_option("gate_v", gate_file_v)->required();
    solitons->add_option("--w", w, "odd window width")->required();
    solitons->add_option("--direction", direction)->check(CLI::IsMember({"plus", "minus"}));
    solitons->add_option("--tol", cfg.tol, "unimodularity tolerance");
    solitons->add_option("--out", cfg.out_dir, "output directory");

    auto* verify = app.add_subcommand("verify-charge", "conservation residual of a charge file");
    verify->add_option("charge", charge_file)->required();
    verify->add_option("gate_u", gate_file)->required();
    verify->add_option("gate_v", gate_file_v)->required();
    verify->add_option("--L", L, "half chain length")->required();
    verify->add_option("--tol", cfg.tol, "conservation tolerance (default 1e-9)");

    auto* thm = app.add_subcommand("theorem1", "oracle vs soliton-charge span equivalence");
    thm->add_option("gate_u", gate_file)->required();
    thm->add_option("gate_v", gate_file_v)->required();
    thm->add_option("--L", L)->required();
    thm->add_option("--w-max", w_max)->required();
    thm->add_option("--out", cfg.out_dir, "output directory");

    auto* scan = app.add_subcommand("scan", "soliton census over random dual-unitary gates");
    scan->add_option("--count", count)->required();
    scan->add_option("--seed", cfg.seed);
    scan->add_option("--w-max", w_max);
    scan->add_option("--out", cfg.out_dir, "output directory");

    std::string demo_gate;
    auto* demo = app.add_subcommand("fswap-demo", "end-to-end pipeline on the fermionic swap circuit");
    demo->add_option("--w", demo_w, "largest soliton width to include (odd)");
    demo->add_option("--gate", demo_gate, "override the gate file");
    demo->add_option("--out", cfg.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.validate();
        if (make->parsed()) return cmd_make_gate(kind, theta, cfg.seed, J, has_j, out_path);
        if (check->parsed()) return cmd_check_gate(gate_file, tol);
        if (solitons->parsed())
            return cmd_find_solitons(gate_file, gate_file_v, w, direction, cfg.tol, cfg.out_dir);
        if (verify->parsed()) return cmd_verify_charge(charge_file, gate_file, gate_file_v, L, cfg.tol);
        if (thm->parsed()) return cmd_theorem1(gate_file, gate_file_v, L, w_max, cfg.out_dir);
        if (scan->parsed()) return cmd_scan(count, cfg.seed, w_max, cfg.out_dir);
        if (demo->parsed()) return cmd_fswap_demo(demo_w, demo_gate, cfg.out_dir);
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const contract_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const resource_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kExitResource;
    } catch (const phase_incompatible& e) {
        std::cerr << "phase incompatible: " << e.what() << "\n";
        return kExitFalse;
    } catch (const numeric_error& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return kExitInconclusive;
    }
    return kExitUsage;
}
