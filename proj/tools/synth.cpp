// Regenerates the synthetic 51-area fixture:
//   cbsae_synth --edges data/us_state_adjacency.csv --seed 1998 --out data/saipe_synthetic.csv

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbsae/error.hpp"
#include "cbsae/graph_smoothness.hpp"
#include "cbsae/io.hpp"
#include "cbsae/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic state-level small-area dataset"};
  std::string edges;
  std::string out;
  std::uint64_t seed = 1998;
  app.add_option("--edges", edges, "State adjacency edge list")->required();
  app.add_option("--out", out, "Output CSV")->required();
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> labels;
    for (const auto& s : cbsae::us_states()) labels.emplace_back(s.code);
    const auto spec = cbsae::load_adjacency(cbsae::read_edge_list(edges), labels);
    cbsae::write_synthetic_csv(out, cbsae::generate_saipe_like(spec, seed));
  } catch (const cbsae::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}
