#include "swarmwatch/sim.hpp"

#include "swarmwatch/snapshot.hpp"

namespace swarmwatch::sim {

CrawlSimResult crawl_truth(const GroundTruth& truth, const geodb::GeoTable& geo, const CrawlSimOptions& options) {
  VirtualClock clock(truth.start());
  MockTracker tracker(truth, clock, options.tracker);
  auto transport = std::make_shared<LoopbackTransport>(tracker);
  tracker::ClientOptions client_options;
  client_options.udp_timeouts = {std::chrono::milliseconds{1}};
  const tracker::TrackerClient client(transport, transport, client_options);
  const crawler::Enumerator enumerator(client, clock, options.enumeration,
                                       tracker::make_crawler_peer_id(truth.spec().seed));
  const auto jobs = truth.jobs("http://tracker.sim/announce", options.interval);

  CrawlSimResult result;
  result.store = std::make_unique<PeerStore>(truth.registry());
  result.schedule = crawler::run_schedule(jobs, truth.end(), enumerator, clock,
                                          [&](const crawler::CrawlCycleResult& r) {
                                            result.store->ingest(crawler::make_snapshot(r, geo), geo);
                                          });
  result.announces = tracker.announces();
  return result;
}

} // namespace swarmwatch::sim
