#include "commands.hpp"

namespace swarmwatch::cli {

int cmd_export(const RunConfig& config, const ExportArgs& args, Io io) {
  if (args.what != "peers" && args.what != "crawl_files")
    throw ConfigError("export takes 'peers' or 'crawl_files'");
  auto store = open_store(config);
  Output output(config, io.out);
  auto& out = output.stream();
  if (args.what == "peers") {
    if (config.json) export_peers_jsonl(*store, out);
    else export_peers_csv(*store, out);
  } else {
    if (config.json) export_crawl_files_jsonl(*store, out);
    else export_crawl_files_csv(*store, out);
  }
  output.finish();
  return 0;
}

} // namespace swarmwatch::cli
