// Writes a synthetic task-format corpus with marker-word-separable labels.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hiertext/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic task-format CSV"};
    hiertext::synthetic::CorpusSpec spec;
    std::string output;
    app.add_option("--n", spec.n, "Number of posts");
    app.add_option("--sexist-fraction", spec.sexist_fraction, "Share of posts labelled sexist")->check(CLI::Range(0.0, 1.0));
    app.add_option("--seed", spec.seed, "Generator seed");
    app.add_option("--output", output, "CSV path")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        hiertext::synthetic::write_corpus(output, hiertext::synthetic::generate(spec));
    } catch (const std::exception& e) {
        std::cerr << "hiertext-synth: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
