// A short tour: certify a dimension expander, condense with it, measure the
// directional bias of inner product, and build the linear branching program
// for a subspace indicator.

#include <iostream>

#include "gf2lab/condense.hpp"
#include "gf2lab/dimexp.hpp"
#include "gf2lab/injector.hpp"
#include "gf2lab/lbp.hpp"
#include "gf2lab/verify.hpp"

using namespace gf2lab;

int main() {
    const auto e = search_dimension_expander(4, 3, Rational(1, 4), 5, 500);
    std::cout << "expander on F_2^4 with 3 maps, certified alpha " << to_string(e.alpha) << "\n";

    const auto C = basic_cond(e, 8);
    const auto r = verify_affine_condenser(C, 4, lemma_rate(e.alpha, 3, Rational(1, 2)));
    std::cout << "BasicCond on 8 bits: " << C.rows() << " rows of " << C.m_out << " bits; over " << r.subspaces
              << " 4-dim sources the best row has rank >= " << r.min_best_rank << " (needed " << r.threshold << ")\n";

    const auto ip = builtin_fn("ip", 8);
    for (const char* def : {"xor_bias", "joint"}) {
        const auto b = directional_bias(ip, 5, def);
        std::cout << "IP on 8 bits, k = 5, " << def << ": " << to_string(*b.exact) << "\n";
    }

    auto J = sample_injector(6, 2, 2, 5, 24, 0);
    std::cout << "random injector (n=6, d=5, m=24) certified: " << (verify_injector(J).ok ? "yes" : "no") << "\n";

    const auto demo = separation_demo(16, 2024);
    std::cout << "subspace indicator on 16 bits: " << demo["program_size"] << " nodes, strongly read-once "
              << demo["strongly_read_once"] << ", best catalog advantage " << demo["max_advantage"].get<std::string>()
              << "\n";
    return 0;
}
