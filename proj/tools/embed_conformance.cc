// Probes a running embedding service against the /embed and /health contract.
//
//   embed_conformance --endpoint http://localhost:8080

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "destructure/embeddings.h"

int main(int argc, char** argv) {
  std::string endpoint;
  CLI::App app{"Embedding service contract checks"};
  app.add_option("--endpoint", endpoint, "Service base URL (fallback: $DESTRUCTURE_EMBED_ENDPOINT)");
  CLI11_PARSE(app, argc, argv);
  if (endpoint.empty()) {
    if (const char* env = std::getenv("DESTRUCTURE_EMBED_ENDPOINT")) endpoint = env;
  }
  if (endpoint.empty()) {
    std::cerr << "no endpoint given\n";
    return 2;
  }

  bool ok = true;
  for (const auto& check : destructure::run_conformance(endpoint)) {
    const char* tag = check.skipped ? "SKIP" : (check.passed ? "PASS" : "FAIL");
    std::cout << "[" << tag << "] " << check.name << ": " << check.detail << "\n";
    ok = ok && check.passed;
  }
  return ok ? 0 : 1;
}
