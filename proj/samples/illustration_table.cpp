// Prints the renormalized illustration answer next to exact iteration.
//   illustration_table [epsilon] [last]

#include <cstdio>
#include <cstdlib>

#include "nmren/verify.hpp"

int main(int argc, char** argv) {
  using namespace nmren;
  const double eps = argc > 1 ? std::atof(argv[1]) : 0.05;
  try {
    CaseStudy cs = IllustrationCase{eps};
    const long last = argc > 2 ? std::atol(argv[2]) : default_window(cs);
    EngineRun run = run_engine(cs);
    std::printf("%s\n", run.solution.c_str());
    std::printf("%s\n", run.renorm_equations.c_str());
    Trajectory exact = iterate_exact(cs, last);
    std::printf("%4s %14s %14s %10s\n", "n", "exact", "renormalized", "error");
    for (long n = 0; n <= last; ++n) {
      auto y = run.value(n);
      std::printf("%4ld %14.8f %14.8f %10.2e\n", n, exact[n].real(), y.real(), std::abs(exact[n] - y));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}
