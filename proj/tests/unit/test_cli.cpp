#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "synthetic.hpp"

namespace fs = std::filesystem;
using netadv::testing::read_file;
using netadv::testing::write_file;

namespace {

struct Result {
  int code;
  std::string err;
  std::string out;
};

Result run(const std::string& args, const fs::path& scratch, const std::string& env = "") {
  const auto out = scratch / "stdout.txt";
  const auto err = scratch / "stderr.txt";
  const std::string cmd = env + " " + NETADV_CLI_PATH + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(err), read_file(out)};
}

}  // namespace

TEST_CASE("command line stages and exit codes") {
  netadv::testing::TempDir tmp;
  const auto data = tmp / "kdd.txt";
  write_file(data, netadv::testing::nslkdd_text(300, 4));
  const auto config = tmp / "exp.ini";
  write_file(config, "[experiment]\nname = cli\nseed = 3\n[data]\npath = kdd.txt\n"
                     "[model]\nepochs = 3\nhidden = 8\n"
                     "[attack]\ntarget = Normal\nsource = DoS\nepsilon = 0.05\n");
  const auto dir = tmp / "stages";
  const std::string d = " --dir " + dir.string();

  SUBCASE("staged run") {
    auto r = run("ingest --format nslkdd --in " + data.string() + " --out " + dir.string(), tmp.path());
    CHECK(r.code == 0);
    CHECK(r.out.find("ingested") == 0);
    r = run("train --model mlp --config " + config.string() + d, tmp.path());
    CHECK(r.code == 0);
    r = run("attack --spec " + config.string() + " --model " + (dir / "model.json").string() + d, tmp.path());
    CHECK(r.code == 0);
    // A sidecar from a finished attack works as a spec too.
    r = run("attack --spec " + (dir / "attack_spec.json").string() + " --model " + (dir / "model.json").string() +
                " --seed 3 --workers 2",
            tmp.path());
    CHECK(r.code == 0);
    write_file(tmp / "squeeze.json", R"({"kind":"feature-squeezing","mix_ratio":0.5,"bits":4,"retrain_on_squeezed":false})");
    r = run("defend --spec " + (tmp / "squeeze.json").string() + d, tmp.path());
    CHECK(r.code == 0);
    r = run("evaluate" + d, tmp.path());
    CHECK(r.code == 0);
    CHECK(r.out.find("undefended: accuracy") == 0);
    r = run("report" + d, tmp.path());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "defended_confusion_after.csv"));
  }
  SUBCASE("run uses the output root from the environment") {
    const auto root = tmp / "root";
    const auto r = run("run --config " + config.string() + " --workers 2", tmp.path(),
                       "NETADV_OUTPUT_ROOT=" + root.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(root / "cli" / "report.json"));
  }
  SUBCASE("validation errors exit with 1") {
    auto r = run("ingest --format csv --in x --out y", tmp.path());
    CHECK(r.code == 1);
    r = run("train --config " + (tmp / "nope.ini").string(), tmp.path());
    CHECK(r.code == 1);
    write_file(tmp / "bad.ini", "[data]\npath = kdd.txt\n[attack]\nkind = deepfool\n");
    r = run("run --config " + (tmp / "bad.ini").string(), tmp.path());
    CHECK(r.code == 1);
    CHECK(r.err.find("attack.kind") != std::string::npos);
    r = run("evaluate --dir " + (tmp / "empty").string(), tmp.path());
    CHECK(r.code == 1);
    CHECK(r.err.find("dataset.json") != std::string::npos);
    r = run("", tmp.path());
    CHECK(r.code == 1);
  }
  SUBCASE("unsupported and runtime failures") {
    write_file(tmp / "svm.ini", "[experiment]\nname = svm\n[data]\npath = kdd.txt\n[model]\nkind = svm\n"
                                "[attack]\nkind = fgsm\nspecificity = non-targeted\nsource = DoS\n");
    auto r = run("run --config " + (tmp / "svm.ini").string() + " --out " + (tmp / "svm").string(), tmp.path());
    CHECK(r.code == 1);
    CHECK(r.err.find("gradients") != std::string::npos);

    write_file(tmp / "garbled.txt", "0,tcp,http,SF,1,2\n");
    r = run("ingest --format nslkdd --in " + (tmp / "garbled.txt").string() + " --out " + (tmp / "g").string(),
            tmp.path());
    CHECK(r.code == 2);
    CHECK(r.err.find("line 1") != std::string::npos);
  }
  SUBCASE("config reference") {
    const auto r = run("config-reference", tmp.path());
    CHECK(r.code == 0);
    CHECK(r.out == read_file(fs::path(NETADV_SOURCE_DIR) / "docs" / "config-reference.md"));
  }
}
