/* Copyright 2026 The gssnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "gssnn/io.hpp"
#include "support/oracles.hpp"

namespace gssnn {
namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() /
              ("gssnn_io_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<Violation> check(const fs::path& p) {
  const std::vector<fs::path> paths{p};
  return validate_files(paths);
}

TEST(GraphJson, RoundTrip) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const auto g = testing::shuffled_copy(testing::random_edge_list(rng, 6, 4), rng);
    const auto j = graph_to_json(g);
    EXPECT_EQ(graph_from_json(Json::parse(j.dump())), g);
  }
  const auto j = graph_to_json(initial_graph());
  EXPECT_EQ(j.dump(), R"({"nodes":[{"id":0,"rank":0}],"edges":[]})");
}

TEST(GraphJson, EmbeddedCarriesFeaturesAndSpec) {
  const auto g = initial_graph();
  const auto spec = make_spec(g, 4, 8);
  const std::vector<double> x{0.5, 0.25, 0.0, -1.0};
  const auto j = embedded_to_json(graph_map(g, x, spec));
  ASSERT_EQ(j.at("features").size(), 1u);
  EXPECT_EQ(j.at("features")[0].size(), 8u);
  EXPECT_EQ(spec_from_json(j.at("spec")), spec);
  EXPECT_EQ(graph_from_json(j), g);
}

TEST(LibraryJson, RoundTrip) {
  auto lib = Library::initial();
  lib.add_abstraction("f0", parse_body("(repeat #0 (compose #1 add_attached_node))", lib), -2.5);
  lib.add_abstraction("f1", parse_body("(f0 2 identity)", lib), -3.0);
  const auto j = library_to_json(lib);
  EXPECT_EQ(j[0].dump(), R"({"name":"identity","arity":0,"body":"builtin","logp":0.0})");
  EXPECT_EQ(j[10].at("body"), "(repeat #0 (compose #1 add_attached_node))");
  const auto back = library_from_json(Json::parse(j.dump()));
  EXPECT_EQ(library_to_json(back), j);
  EXPECT_EQ(back[11].params, lib[11].params);

  auto bad = j;
  bad[10]["arity"] = 1;
  EXPECT_THROW(library_from_json(bad), Error);
  bad = j;
  bad[0]["name"] = "warp";
  EXPECT_THROW(library_from_json(bad), Error);
}

TEST(PopulationJson, RoundTrip) {
  const auto lib = Library::initial();
  std::vector<PopulationEntry> pop;
  for (const char* text : {"add_attached_node", "(repeat 3 add_attached_node)"}) {
    const auto p = parse_program(text, lib);
    pop.push_back({p, evaluate(p, lib), std::nullopt});
  }
  pop[0].fitness = FitnessRecord{0.75, 0.5, "x"};
  pop[1].fitness = FitnessRecord{0.5, std::nullopt, "y"};
  const auto j = population_to_json(pop, lib);
  EXPECT_TRUE(j[1].at("fitness").at("validation_accuracy").is_null());
  EXPECT_EQ(population_from_json(Json::parse(j.dump()), lib), pop);
  EXPECT_EQ(corpus_from_json(j, lib).size(), 2u);
  EXPECT_EQ(corpus_from_json(Json::parse(R"(["identity"])"), lib).front(),
            parse_program("identity", lib));
}

TEST(FitnessJson, RangeChecked) {
  EXPECT_THROW(fitness_from_json(Json::parse(R"({"train_accuracy":1.5})")), Error);
  EXPECT_THROW(fitness_from_json(Json::parse(R"({"train_accuracy":0.5,"validation_accuracy":-0.1})")),
               Error);
  const auto f = fitness_from_json(
      Json::parse(R"({"train_accuracy":0.5,"validation_accuracy":0.25,"evaluator_id":"t"})"));
  EXPECT_EQ(f, (FitnessRecord{0.5, 0.25, "t"}));
}

TEST(JobJson, Shape) {
  const auto g = initial_graph();
  const FitnessJob job{"it0-e0", g, make_spec(g, 512, 512), 42};
  const auto j = job_to_json(job);
  EXPECT_EQ(j.dump(),
            R"({"graph":{"nodes":[{"id":0,"rank":0}],"edges":[]},"spec":{"m":512,"q":512,"d_star":1,"r_star":1},"seed":42})");
}

TEST(ConfigJson, OverlayAndRoundTrip) {
  EvolutionConfig c;
  c.pop_cap = 30;
  c.max_enumerated = 100;
  c.fitness_backend = FitnessBackendKind::External;
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  const auto partial = config_from_json(Json::parse(R"({"seed": 9})"));
  EXPECT_EQ(partial.seed, 9u);
  EXPECT_EQ(partial.pop_cap, 50u);
  EXPECT_THROW(config_from_json(Json::parse(R"({"fitness": "oracle"})")), Error);
  EXPECT_THROW(config_from_json(Json::parse(R"({"selection_threshold": 80})")), Error);
}

TEST(ValidateFiles, ValidPopulation) {
  TempDir dir("valid");
  const auto lib = Library::initial();
  std::vector<PopulationEntry> pop;
  for (const char* text : {"add_attached_node", "(repeat 3 add_attached_node)"}) {
    const auto p = parse_program(text, lib);
    pop.push_back({p, evaluate(p, lib), FitnessRecord{0.5, std::nullopt, "t"}});
  }
  write_json_file(dir.path() / "pop.json", population_to_json(pop, lib));
  write_json_file(dir.path() / "lib.json", library_to_json(lib));
  write_json_file(dir.path() / "graph.json", graph_to_json(pop[1].graph));
  EXPECT_TRUE(check(dir.path() / "pop.json").empty());
  EXPECT_TRUE(check(dir.path() / "lib.json").empty());
  EXPECT_TRUE(check(dir.path() / "graph.json").empty());
}

TEST(ValidateFiles, SelfEdge) {
  TempDir dir("self");
  write_text_file(dir.path() / "g.json",
                  R"({"nodes":[{"id":0,"rank":0},{"id":1,"rank":0}],
                      "edges":[{"id":2,"rank":1,"u":0,"v":1},{"id":3,"rank":2,"u":1,"v":1}]})");
  const auto v = check(dir.path() / "g.json");
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().message, "self-edge at id 3");
}

TEST(ValidateFiles, SizeLimit) {
  TempDir dir("size");
  std::string text = "identity";
  for (int k = 0; k < 75; ++k) text = "(compose identity " + text + ")";
  const auto lib = Library::initial();
  ASSERT_EQ(program_size(parse_program(text, lib)), 151u);
  write_text_file(dir.path() / "programs.txt", "add_attached_node\n" + text + "\n");
  const auto v = check(dir.path() / "programs.txt");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.front().location, "line 2");
  EXPECT_NE(v.front().message.find("size limit"), std::string::npos);

  write_json_file(dir.path() / "pop.json", Json::array({Json{{"program", text}}}));
  const auto w = check(dir.path() / "pop.json");
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.front().message, "size limit (151 > 150)");
}

TEST(ValidateFiles, PopulationProblems) {
  TempDir dir("popbad");
  const auto lib = Library::initial();
  const auto a = parse_program("(repeat 2 add_attached_node)", lib);
  const auto b = parse_program("(compose add_attached_node add_attached_node)", lib);
  Json pop = population_to_json(std::vector<PopulationEntry>{{a, evaluate(a, lib), std::nullopt},
                                                             {b, evaluate(b, lib), std::nullopt}},
                                lib);
  pop[0]["graph"] = graph_to_json(initial_graph());
  write_json_file(dir.path() / "pop.json", pop);
  const auto v = check(dir.path() / "pop.json");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "graph does not match program");

  pop[0]["graph"] = graph_to_json(evaluate(a, lib));
  write_json_file(dir.path() / "pop.json", pop);
  const auto w = check(dir.path() / "pop.json");
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].location, "entry 1");
  EXPECT_EQ(w[0].message, "structurally isomorphic to entry 0");
}

TEST(ValidateFiles, ProgramsUseSiblingLibrary) {
  TempDir dir("sibling");
  auto lib = Library::initial();
  lib.add_abstraction("f0", parse_body("(compose add_attached_node add_attached_node)", lib));
  write_text_file(dir.path() / "programs.txt", "(compose f0 f0)\n");
  EXPECT_FALSE(check(dir.path() / "programs.txt").empty());
  write_json_file(dir.path() / "lib.json", library_to_json(lib));
  EXPECT_TRUE(check(dir.path() / "programs.txt").empty());
}

TEST(ValidateFiles, JobAndFitness) {
  TempDir dir("job");
  GraphBuilder b;
  b.add_node();
  b.add_attached_node();
  const auto g = std::move(b).build();
  write_json_file(dir.path() / "job.json", job_to_json(FitnessJob{"j", g, make_spec(g, 16, 8), 1}));
  EXPECT_TRUE(check(dir.path() / "job.json").empty());
  write_json_file(dir.path() / "small.json",
                  job_to_json(FitnessJob{"j", g, EmbeddingSpec{16, 8, 2, 2, {}}, 1}));
  EXPECT_EQ(check(dir.path() / "small.json").size(), 1u);
  write_text_file(dir.path() / "fitness.json", R"({"train_accuracy": 2.0})");
  EXPECT_EQ(check(dir.path() / "fitness.json").size(), 1u);
  EXPECT_THROW(check(dir.path() / "missing.json"), Error);
}

TEST(ValidateFiles, EmbeddedFeatureLengths) {
  TempDir dir("emb");
  const auto g = initial_graph();
  auto j = embedded_to_json(graph_map(g, std::vector<double>(4, 0.0), make_spec(g, 4, 8)));
  write_json_file(dir.path() / "e.json", j);
  EXPECT_TRUE(check(dir.path() / "e.json").empty());
  j["features"][0].erase(0);
  write_json_file(dir.path() / "e.json", j);
  EXPECT_EQ(check(dir.path() / "e.json").size(), 1u);
}

IterationReport report_with(std::size_t k, std::vector<EvaluatedEntry> evaluated) {
  IterationReport r;
  r.iteration = k;
  r.evaluated = std::move(evaluated);
  return r;
}

TEST(ExportStats, RankSortedRows) {
  TempDir dir("stats");
  EvolutionState state;
  save_iteration(dir.path(), state,
                 report_with(0, {{"identity", 1, {0.6, std::nullopt, "s"}},
                                 {"add_attached_node", 1, {0.8, 0.7, "s"}}}));
  save_iteration(dir.path(), state, report_with(1, {{"identity", 1, {0.6, 0.5, "s"}}}));
  const auto csv = export_stats(dir.path());
  EXPECT_EQ(csv,
            "iteration,population_size,rank,train_accuracy,validation_accuracy,program\n"
            "0,2,1,0.8,0.7,\"add_attached_node\"\n"
            "0,2,2,0.6,,\"identity\"\n"
            "1,1,1,0.6,0.5,\"identity\"\n");
}

TEST(ExportStats, EmptyStateDir) {
  TempDir dir("nostats");
  EXPECT_THROW(export_stats(dir.path()), Error);
}

TEST(StatePersistence, SaveAndResume) {
  TempDir dir("state");
  EvolutionState state;
  SurrogateFitness backend;
  EvolutionConfig config;
  config.max_enumerated = 2000;
  for (int k = 0; k < 2; ++k) {
    const auto report = run_iteration(state, config, backend);
    save_iteration(dir.path(), state, report);
  }
  EXPECT_EQ(persisted_iterations(dir.path()), (std::vector<std::size_t>{0, 1}));
  EXPECT_FALSE(fs::exists(dir.path() / "iteration_1.tmp"));
  const auto loaded = load_latest_state(dir.path());
  ASSERT_TRUE(loaded);
  EXPECT_EQ(loaded->iteration, state.iteration);
  EXPECT_EQ(loaded->population, state.population);
  EXPECT_EQ(library_to_json(loaded->library), library_to_json(state.library));

  // A resumed run continues exactly like the uninterrupted one.
  auto resumed = *loaded;
  const auto r1 = run_iteration(state, config, backend);
  const auto r2 = run_iteration(resumed, config, backend);
  EXPECT_EQ(population_to_json(state.population, state.library),
            population_to_json(resumed.population, resumed.library));
  EXPECT_EQ(r1.novel_added, r2.novel_added);

  const auto report = read_json_file(iteration_dir(dir.path(), 1) / "report.json");
  EXPECT_EQ(report.at("iteration"), 1);
  EXPECT_TRUE(check(iteration_dir(dir.path(), 1) / "pop.json").empty());
  EXPECT_FALSE(load_latest_state(dir.path() / "nothing"));
}

}  // namespace
}  // namespace gssnn
