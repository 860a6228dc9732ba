#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "commands.hpp"
#include "swarmwatch/sim.hpp"

namespace swarmwatch::cli {

int cmd_simulate(const RunConfig& config, const SimulateArgs& args, Io io) {
  if (!std::filesystem::is_regular_file(args.spec))
    throw ConfigError(fmt::format("population spec '{}' does not exist", args.spec.string()));
  std::vector<std::int64_t> intervals;
  for (auto s : args.intervals_s) {
    if (s <= 0) throw ConfigError("--intervals must be positive");
    if (std::find(intervals.begin(), intervals.end(), s) != intervals.end()) {
      io.err << fmt::format("warning: interval {} s listed twice; running it once\n", s);
      continue;
    }
    intervals.push_back(s);
  }
  if (intervals.empty()) throw ConfigError("--intervals needs at least one value");
  if (args.max_peers == 0) throw ConfigError("--max-peers must be positive");

  sim::PopulationSpec spec;
  try {
    spec = sim::PopulationSpec::load(args.spec);
  } catch (const sim::SimError& e) {
    throw ConfigError(e.what());
  }
  const auto geo = load_geo(config);
  const auto truth = sim::generate(spec, geo);
  if (args.truth_csv) {
    std::ofstream out(*args.truth_csv, std::ios::binary | std::ios::trunc);
    out << truth.to_csv();
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", args.truth_csv->string()));
  }

  Output output(config, io.out);
  auto& out = output.stream();
  if (!config.json) out << "interval_s,cycles,announces,observed,active,recall,precision,span_mae_s\n";
  for (auto s : intervals) {
    sim::CrawlSimOptions options;
    options.interval = Seconds{s};
    options.enumeration.saturation_rounds = config.saturation;
    options.enumeration.round_budget = config.budget;
    options.enumeration.numwant = config.numwant;
    options.tracker.seed = spec.seed;
    options.tracker.max_peers = args.max_peers;
    const auto run = sim::crawl_truth(truth, geo, options);
    sim::ScoreOptions score_options;
    score_options.min_online = Seconds{args.min_online_s};
    const auto sc = sim::score(truth, *run.store, score_options);
    if (config.json) {
      out << nlohmann::ordered_json{{"interval_s", s},
                                    {"cycles", run.schedule.cycles},
                                    {"announces", run.announces},
                                    {"observed", sc.observed},
                                    {"active", sc.active},
                                    {"recall", sc.recall},
                                    {"precision", sc.precision},
                                    {"span_mae_s", sc.span_mae_s}}
                 .dump()
          << '\n';
    } else {
      out << fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.1f}\n", s, run.schedule.cycles, run.announces, sc.observed,
                         sc.active, sc.recall, sc.precision, sc.span_mae_s);
    }
  }
  output.finish();
  return 0;
}

} // namespace swarmwatch::cli
