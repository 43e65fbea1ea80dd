// Release checklist runner: executes the verification criteria and prints
// one pass/fail line per criterion. Exit code 3 if any criterion fails.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "urbp/acceptance.hpp"
#include "urbp/errors.hpp"

namespace {

void usage(const char* argv0) {
    std::fprintf(stderr,
                 "usage: %s [--only 1,4,9] [--workers N] [--out DIR]\n"
                 "  --only     comma-separated criterion ids (default: all)\n"
                 "  --workers  worker threads (default: hardware concurrency)\n"
                 "  --out      scratch directory for the determinism criterion\n",
                 argv0);
}

std::vector<int> parse_ids(const std::string& arg) {
    std::vector<int> ids;
    size_t pos = 0;
    while (pos < arg.size()) {
        size_t comma = arg.find(',', pos);
        if (comma == std::string::npos) comma = arg.size();
        const std::string tok = arg.substr(pos, comma - pos);
        if (!tok.empty()) ids.push_back(std::stoi(tok));
        pos = comma + 1;
    }
    return ids;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> ids;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    std::string scratch = "acceptance_scratch";

    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        auto next = [&]() -> const char* {
            if (i + 1 >= argc) {
                usage(argv[0]);
                std::exit(2);
            }
            return argv[++i];
        };
        if (a == "--only") {
            ids = parse_ids(next());
        } else if (a == "--workers") {
            workers = std::atoi(next());
        } else if (a == "--out") {
            scratch = next();
        } else if (a == "--help" || a == "-h") {
            usage(argv[0]);
            return 0;
        } else {
            std::fprintf(stderr, "unknown argument: %s\n", a.c_str());
            usage(argv[0]);
            return 2;
        }
    }

    try {
        const auto results = urbp::run_acceptance(ids, workers, scratch);
        bool all_passed = true;
        for (const auto& r : results) {
            std::printf("%s\n", urbp::format_criterion_line(r).c_str());
            std::fflush(stdout);
            all_passed = all_passed && r.passed;
        }
        return all_passed ? 0 : 3;
    } catch (const urbp::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
