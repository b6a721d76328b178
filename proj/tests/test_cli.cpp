#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "symdiff/io.hpp"

// exercises the installed binary end to end: flag parsing and exit codes
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(SYMDIFF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes") {
    const fs::path dir = fs::temp_directory_path() / "symdiff_cli_smoke";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CHECK(run("analyze-mixing --n 12 --out " + (dir / "mix").string()) == 0);
    CHECK(run("analyze-mixing --n 1 --out " + (dir / "bad").string()) == 2);   // usage
    CHECK(run("analyze-mixing") == 2);                                         // missing --n
    CHECK(run("no-such-command") == 2);
    CHECK(run("--help") == 0);
    CHECK(run("train --config " + (dir / "missing.json").string()) == 1);      // IO failure
    CHECK(run("oracle --n-max 7") == 2);                                       // above the cap
    CHECK(run("oracle --n-max 3 --out " + (dir / "oracle").string()) == 0);
    CHECK(run("gradcheck --head pl --n 3 --out " + (dir / "grad").string()) == 0);
    CHECK(run("sample-shuffle --kind RS --n 4 --T 3 --seed 5 --out " + (dir / "shuf").string()) ==
          0);

    const auto report =
        nlohmann::json::parse(symdiff::read_file((dir / "oracle" / "oracle_report.json").string()));
    CHECK(report.at("checks").size() >= 10);
    fs::remove_all(dir);
}
