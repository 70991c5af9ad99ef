#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "io.hpp"

namespace risauction {

/// A pipeline request is a JSON object:
///   command    accuracy | train | evaluate | tradeoff | auction-demo
///   out        output directory (created if missing, write-once)
///   seed       root seed
///   jobs       worker threads, 0 = all cores (never changes results)
///   overwrite  allow reusing a non-empty output directory
///   config     overlay onto the built-in defaults (see RunConfig)
///   args       command-specific arguments:
///                evaluate:     strategies = ["value-heuristic", "null,rl:ckpt.json", ...]
///                tradeoff:     checkpoints = directory holding beta_<b>/policy.json
///                auction-demo: bidders = "spec,spec,..."
/// The result lists the files written plus a short summary.
Json run_pipeline(const Json& request);

/// Re-runs the request recorded in a manifest. An empty `out` reuses the
/// recorded directory (which then needs `overwrite`).
Json replay_manifest(const std::filesystem::path& manifest, const std::string& out, bool overwrite);

/// Strategy from a spec string; a comma-separated list assigns one bidder per
/// BS, a single spec is applied to every BS. rl:<path> loads a checkpoint and
/// uses its agent b for BS b.
Strategy load_strategy(const std::string& text, std::size_t n_bs);

std::filesystem::path tradeoff_checkpoint_path(const std::filesystem::path& dir, double beta);

}  // namespace risauction
