#include "swarmwatch/peerstore.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "swarmwatch/digest.hpp"

namespace swarmwatch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t checkpoint_every = 5000;

std::int64_t epoch(Instant t) { return t.time_since_epoch().count(); }
Instant from_epoch(std::int64_t s) { return Instant{Seconds{s}}; }

json membership_to_json(const Membership& m) { return std::vector<std::uint64_t>(m.words().begin(), m.words().end()); }

Membership membership_from_json(const json& j) {
  Membership m;
  const auto words = j.get<std::vector<std::uint64_t>>();
  for (std::size_t w = 0; w < words.size(); ++w)
    for (int b = 0; b < 64; ++b)
      if ((words[w] >> b & 1U) != 0) m.set(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(b) + 1));
  return m;
}

json peer_to_json(const PeerRecord& p) {
  return json{{"ip", p.ip.value()},
              {"country", p.country},
              {"state", p.state},
              {"city", p.city},
              {"isp", p.isp},
              {"lon", p.longitude},
              {"lat", p.latitude},
              {"m", membership_to_json(p.membership)},
              {"first", epoch(p.first_seen)},
              {"last", epoch(p.last_seen)},
              {"hits", p.hit_count}};
}

PeerRecord peer_from_json(const json& j) {
  PeerRecord p;
  p.ip = Ipv4{j.at("ip").get<std::uint32_t>()};
  p.country = j.at("country").get<std::string>();
  p.state = j.at("state").get<std::string>();
  p.city = j.at("city").get<std::string>();
  p.isp = j.at("isp").get<std::string>();
  p.longitude = j.at("lon").get<double>();
  p.latitude = j.at("lat").get<double>();
  p.membership = membership_from_json(j.at("m"));
  p.first_seen = from_epoch(j.at("first").get<std::int64_t>());
  p.last_seen = from_epoch(j.at("last").get<std::int64_t>());
  p.hit_count = j.at("hits").get<std::uint64_t>();
  return p;
}

json snapshot_to_json(const SnapshotRecord& s) {
  return json{{"time", epoch(s.time)},      {"network", s.network},     {"peer_count", s.peer_count},
              {"torrent_id", s.torrent_id}, {"euro", s.euro_count},     {"na", s.na_count},
              {"aus", s.aus_count}};
}

SnapshotRecord snapshot_from_json(const json& j) {
  return {from_epoch(j.at("time").get<std::int64_t>()), j.at("network").get<std::string>(),
          j.at("peer_count").get<std::uint64_t>(),      j.at("torrent_id").get<std::uint32_t>(),
          j.at("euro").get<std::uint64_t>(),            j.at("na").get<std::uint64_t>(),
          j.at("aus").get<std::uint64_t>()};
}

void write_file_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw StoreError(StoreErrc::io_error, fmt::format("peerstore: cannot write '{}'", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StoreError(StoreErrc::io_error, fmt::format("peerstore: cannot replace '{}': {}", path.string(), ec.message()));
}

void merge_into(PeerRecord& into, const PeerRecord& from) {
  into.membership |= from.membership;
  into.hit_count += from.hit_count;
  into.first_seen = std::min(into.first_seen, from.first_seen);
  into.last_seen = std::max(into.last_seen, from.last_seen);
}

} // namespace

IngestStats& IngestStats::operator+=(const IngestStats& o) {
  files += o.files;
  deduped += o.deduped;
  peers_upserted += o.peers_upserted;
  new_peers += o.new_peers;
  bogons_skipped += o.bogons_skipped;
  return *this;
}

bool PeerFilter::matches(const PeerRecord& p) const {
  if (country && p.country != *country) return false;
  if (state && p.state != *state) return false;
  if (city && p.city != *city) return false;
  if (isp && p.isp != *isp) return false;
  if (membership && !swarmwatch::matches(p.membership, *membership, membership_mode)) return false;
  return true;
}

/// One logged state change. Ingests carry the geolocation of peers first seen
/// in that snapshot so replay does not need the geo table.
struct PeerStore::Mutation {
  std::uint64_t seq = 0;
  std::optional<Digest20> digest;
  SnapshotRecord snapshot;
  std::vector<Ipv4> ips;
  std::vector<PeerRecord> fresh;
  std::size_t bogons = 0;

  json to_json() const {
    json fresh_json = json::array();
    for (const auto& p : fresh) fresh_json.push_back(peer_to_json(p));
    std::vector<std::uint32_t> raw_ips;
    raw_ips.reserve(ips.size());
    for (auto ip : ips) raw_ips.push_back(ip.value());
    return json{{"seq", seq},
                {"digest", digest ? digest->hex() : std::string{}},
                {"snapshot", snapshot_to_json(snapshot)},
                {"ips", raw_ips},
                {"fresh", std::move(fresh_json)},
                {"bogons", bogons}};
  }

  static Mutation from_json(const json& j) {
    Mutation m;
    m.seq = j.at("seq").get<std::uint64_t>();
    if (const auto d = j.at("digest").get<std::string>(); !d.empty()) m.digest = Digest20::from_hex(d);
    m.snapshot = snapshot_from_json(j.at("snapshot"));
    for (auto raw : j.at("ips").get<std::vector<std::uint32_t>>()) m.ips.emplace_back(raw);
    for (const auto& p : j.at("fresh")) m.fresh.push_back(peer_from_json(p));
    m.bogons = j.at("bogons").get<std::size_t>();
    return m;
  }
};

PeerStore::PeerStore(TorrentRegistry registry) : registry_(std::move(registry)) {}

PeerStore::~PeerStore() = default;

std::unique_ptr<PeerStore> PeerStore::open(const fs::path& dir, const TorrentRegistry* registry) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StoreError(StoreErrc::io_error, fmt::format("peerstore: cannot create '{}': {}", dir.string(), ec.message()));

  auto store = std::make_unique<PeerStore>();
  store->dir_ = dir;
  const fs::path registry_path = dir / "registry.csv";
  if (fs::exists(registry_path)) store->registry_ = TorrentRegistry::load(registry_path);
  store->replay(dir);

  store->log_.open(dir / "log.jsonl", std::ios::binary | std::ios::app);
  if (!store->log_) throw StoreError(StoreErrc::io_error, "peerstore: cannot open log for appending");

  if (registry != nullptr) store->register_torrents(registry->torrents());
  else if (!fs::exists(registry_path)) write_file_atomically(registry_path, store->registry_.to_csv());
  return store;
}

void PeerStore::replay(const fs::path& dir) {
  std::uint64_t covered = 0;
  if (std::ifstream in(dir / "checkpoint.jsonl", std::ios::binary); in) {
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "header") {
          covered = j.at("seq").get<std::uint64_t>();
          total_hits_ = j.at("total_hits").get<std::uint64_t>();
          header = true;
        } else if (kind == "peer") {
          auto p = peer_from_json(j);
          peers_.emplace(p.ip, std::move(p));
        } else if (kind == "snapshot") {
          snapshots_.push_back(snapshot_from_json(j));
        } else if (kind == "counts") {
          counted_[membership_from_json(j.at("m"))] += j.at("n").get<std::uint64_t>();
        } else if (kind == "digest") {
          if (auto d = Digest20::from_hex(j.at("d").get<std::string>())) ingested_digests_.insert(*d);
        }
      } catch (const json::exception& e) {
        throw StoreError(StoreErrc::corrupt, fmt::format("peerstore: bad checkpoint line: {}", e.what()));
      }
    }
    if (!header) throw StoreError(StoreErrc::corrupt, "peerstore: checkpoint without header");
  }
  seq_ = covered;

  const fs::path log_path = dir / "log.jsonl";
  std::ifstream log(log_path, std::ios::binary);
  if (!log) return;
  std::ostringstream buffer;
  buffer << log.rdbuf();
  log.close();
  const std::string text = buffer.str();

  // A final line without its newline was cut off mid-write. Drop it if it does
  // not parse, otherwise finish it, so later appends start on a fresh line.
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const bool torn = nl == std::string::npos;
    const std::string_view line(text.data() + pos, (torn ? text.size() : nl) - pos);
    ++line_no;
    const std::size_t line_start = pos;
    pos = torn ? text.size() : nl + 1;
    if (line.empty()) continue;
    Mutation m;
    try {
      m = Mutation::from_json(json::parse(line));
    } catch (const json::exception& e) {
      if (!torn) throw StoreError(StoreErrc::corrupt, fmt::format("peerstore: bad log line {}: {}", line_no, e.what()));
      fs::resize_file(log_path, line_start);
      break;
    }
    if (torn) std::ofstream(log_path, std::ios::binary | std::ios::app) << '\n';
    if (m.seq <= covered) continue;
    apply(m, nullptr);
    seq_ = std::max(seq_, m.seq);
  }
}

std::vector<std::uint32_t> PeerStore::register_torrents(std::span<const TorrentInfo> torrents) {
  std::unique_lock lock(mu_);
  std::vector<std::uint32_t> ids;
  bool changed = false;
  for (const auto& t : torrents) {
    if (const auto* existing = registry_.find(t.infohash)) {
      if (t.id != 0 && t.id != existing->id)
        throw RegistryError(fmt::format("registry: {} is torrent {} in the store, not {}", t.infohash.hex(),
                                        existing->id, t.id));
      ids.push_back(existing->id);
      continue;
    }
    TorrentInfo copy = t;
    const auto next = static_cast<std::uint32_t>(registry_.size() + 1);
    if (copy.id != 0 && copy.id != next)
      throw RegistryError(fmt::format("registry: torrent id {} conflicts with the store (next id {})", copy.id, next));
    copy.id = next;
    ids.push_back(registry_.add(std::move(copy)));
    changed = true;
  }
  if (dir_ && (changed || !fs::exists(*dir_ / "registry.csv")))
    write_file_atomically(*dir_ / "registry.csv", registry_.to_csv());
  return ids;
}

IngestStats PeerStore::ingest_snapshot(std::string_view xml, const geodb::GeoTable& geo) {
  crawler::Snapshot snapshot;
  try {
    snapshot = crawler::parse_snapshot_xml(xml);
  } catch (const crawler::SchemaViolation& e) {
    throw StoreError(StoreErrc::schema_violation, e.what());
  }
  const Digest20 digest = sha1(xml);

  std::unique_lock lock(mu_);
  if (ingested_digests_.contains(digest)) {
    IngestStats stats;
    stats.deduped = 1;
    return stats;
  }
  return ingest_locked(snapshot, geo, digest);
}

IngestStats PeerStore::ingest(const crawler::Snapshot& snapshot, const geodb::GeoTable& geo) {
  std::unique_lock lock(mu_);
  return ingest_locked(snapshot, geo, std::nullopt);
}

IngestStats PeerStore::ingest_locked(const crawler::Snapshot& snapshot, const geodb::GeoTable& geo,
                                     std::optional<Digest20> digest) {
  const auto* torrent = registry_.find(snapshot.torrent_id);
  if (torrent == nullptr)
    throw StoreError(StoreErrc::unknown_torrent_id,
                     fmt::format("peerstore: torrent id {} is not registered", snapshot.torrent_id));
  if (torrent->infohash != snapshot.infohash)
    throw StoreError(StoreErrc::schema_violation,
                     fmt::format("peerstore: snapshot infohash {} does not match torrent {} ({})",
                                 snapshot.infohash.hex(), snapshot.torrent_id, torrent->infohash.hex()));

  Mutation m;
  m.seq = seq_ + 1;
  m.digest = digest;
  m.snapshot = {snapshot.time,       snapshot.network,  snapshot.peer_count, snapshot.torrent_id,
                snapshot.euro_count, snapshot.na_count, snapshot.aus_count};
  std::vector<Ipv4> ips;
  ips.reserve(snapshot.peers.size());
  for (const auto& p : snapshot.peers) {
    if (p.bogon || p.endpoint.ip.is_bogon()) {
      ++m.bogons;
      continue;
    }
    ips.push_back(p.endpoint.ip);
  }
  std::sort(ips.begin(), ips.end());
  ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
  for (auto ip : ips) {
    if (peers_.contains(ip)) continue;
    PeerRecord fresh;
    fresh.ip = ip;
    if (const auto* rec = geo.lookup(ip)) {
      fresh.country = rec->country;
      fresh.state = rec->state;
      fresh.city = rec->city;
      fresh.isp = rec->isp;
      fresh.longitude = rec->longitude;
      fresh.latitude = rec->latitude;
    }
    m.fresh.push_back(std::move(fresh));
  }
  m.ips = std::move(ips);

  IngestStats stats;
  append_log(m);
  seq_ = m.seq;
  apply(m, &stats);
  if (dir_ && seq_ % checkpoint_every == 0) write_checkpoint_locked();
  return stats;
}

void PeerStore::apply(const Mutation& m, IngestStats* stats) {
  std::unordered_map<std::uint32_t, const PeerRecord*> fresh;
  for (const auto& p : m.fresh) fresh.emplace(p.ip.value(), &p);

  const Instant t = m.snapshot.time;
  for (auto ip : m.ips) {
    auto [it, inserted] = peers_.try_emplace(ip);
    PeerRecord& rec = it->second;
    if (inserted) {
      if (auto f = fresh.find(ip.value()); f != fresh.end()) rec = *f->second;
      rec.ip = ip;
      rec.first_seen = t;
      rec.last_seen = t;
      rec.hit_count = 0;
      rec.membership = {};
    }
    rec.membership.set(m.snapshot.torrent_id);
    ++rec.hit_count;
    ++total_hits_;
    rec.first_seen = std::min(rec.first_seen, t);
    rec.last_seen = std::max(rec.last_seen, t);
    if (stats != nullptr && inserted) ++stats->new_peers;
  }
  snapshots_.push_back(m.snapshot);
  if (m.digest) ingested_digests_.insert(*m.digest);
  if (stats != nullptr) {
    stats->files += 1;
    stats->peers_upserted += m.ips.size();
    stats->bogons_skipped += m.bogons;
  }
}

void PeerStore::append_log(const Mutation& m) {
  if (!dir_) return;
  log_ << m.to_json().dump() << '\n';
  log_.flush();
  if (!log_) throw StoreError(StoreErrc::io_error, "peerstore: log append failed");
}

void PeerStore::import_peers(std::span<const PeerRecord> peers) {
  std::unique_lock lock(mu_);
  for (const auto& p : peers) {
    auto [it, inserted] = peers_.try_emplace(p.ip, p);
    if (!inserted) merge_into(it->second, p);
    total_hits_ += p.hit_count;
  }
  if (dir_) write_checkpoint_locked();
}

void PeerStore::import_counts(const RegionHistogram& counts) {
  std::unique_lock lock(mu_);
  for (const auto& [m, n] : counts.regions()) {
    for (auto id : m.ids())
      if (!registry_.contains(id))
        throw StoreError(StoreErrc::unknown_torrent_id, fmt::format("peerstore: torrent id {} is not registered", id));
  }
  for (const auto& [m, n] : counts.regions())
    if (n > 0 && !m.empty()) counted_[m] += n;
  if (dir_) write_checkpoint_locked();
}

std::size_t PeerStore::regeolocate(const geodb::GeoTable& geo) {
  std::unique_lock lock(mu_);
  std::size_t changed = 0;
  for (auto& [ip, rec] : peers_) {
    const auto* g = geo.lookup(ip);
    PeerRecord updated = rec;
    updated.country = g ? g->country : "";
    updated.state = g ? g->state : "";
    updated.city = g ? g->city : "";
    updated.isp = g ? g->isp : "";
    updated.longitude = g ? g->longitude : 0.0;
    updated.latitude = g ? g->latitude : 0.0;
    if (updated.country != rec.country || updated.state != rec.state || updated.city != rec.city ||
        updated.isp != rec.isp || updated.longitude != rec.longitude || updated.latitude != rec.latitude) {
      rec = std::move(updated);
      ++changed;
    }
  }
  if (dir_) write_checkpoint_locked();
  return changed;
}

void PeerStore::checkpoint() {
  std::unique_lock lock(mu_);
  if (dir_) write_checkpoint_locked();
}

void PeerStore::write_checkpoint_locked() {
  std::string out;
  out += json{{"kind", "header"}, {"version", 1}, {"seq", seq_}, {"total_hits", total_hits_}}.dump();
  out.push_back('\n');
  for (const auto& s : snapshots_) {
    json j = snapshot_to_json(s);
    j["kind"] = "snapshot";
    out += j.dump();
    out.push_back('\n');
  }
  for (const auto& [m, n] : counted_) {
    out += json{{"kind", "counts"}, {"m", membership_to_json(m)}, {"n", n}}.dump();
    out.push_back('\n');
  }
  for (const auto& d : ingested_digests_) {
    out += json{{"kind", "digest"}, {"d", d.hex()}}.dump();
    out.push_back('\n');
  }
  for (const auto& [ip, p] : peers_) {
    json j = peer_to_json(p);
    j["kind"] = "peer";
    out += j.dump();
    out.push_back('\n');
  }
  write_file_atomically(*dir_ / "checkpoint.jsonl", out);
  // Everything up to seq_ is now in the checkpoint; start a fresh log.
  log_.close();
  log_.open(*dir_ / "log.jsonl", std::ios::binary | std::ios::trunc);
  if (!log_) throw StoreError(StoreErrc::io_error, "peerstore: cannot reopen log");
}

TorrentRegistry PeerStore::registry() const {
  std::shared_lock lock(mu_);
  return registry_;
}

std::size_t PeerStore::peer_count() const {
  std::shared_lock lock(mu_);
  return peers_.size();
}

std::uint64_t PeerStore::distinct_peers() const {
  std::shared_lock lock(mu_);
  std::uint64_t n = peers_.size();
  for (const auto& [m, c] : counted_) n += c;
  return n;
}

std::size_t PeerStore::snapshot_count() const {
  std::shared_lock lock(mu_);
  return snapshots_.size();
}

void PeerStore::validate_selector(std::span<const std::uint32_t> ids) const {
  if (ids.empty()) throw StoreError(StoreErrc::bad_selector, "peerstore: empty torrent selector");
  for (auto id : ids)
    if (!registry_.contains(id))
      throw StoreError(StoreErrc::unknown_torrent_id, fmt::format("peerstore: torrent id {} is not registered", id));
}

std::uint64_t PeerStore::distinct_count(std::span<const std::uint32_t> ids, SetMode mode) const {
  std::shared_lock lock(mu_);
  validate_selector(ids);
  const Membership selector = Membership::of(ids);
  std::uint64_t n = 0;
  for (const auto& [ip, p] : peers_)
    if (matches(p.membership, selector, mode)) ++n;
  for (const auto& [m, c] : counted_)
    if (matches(m, selector, mode)) n += c;
  return n;
}

RegionHistogram PeerStore::histogram() const {
  std::shared_lock lock(mu_);
  std::map<Membership, std::uint64_t> counts = counted_;
  for (const auto& [ip, p] : peers_) ++counts[p.membership];
  RegionHistogram h;
  for (const auto& [m, n] : counts) h.add(m, n);
  return h;
}

void PeerStore::for_each_matching(const PeerFilter& filter, const std::function<void(const PeerRecord&)>& fn) const {
  std::shared_lock lock(mu_);
  for (const auto& [ip, p] : peers_)
    if (filter.matches(p)) fn(p);
}

std::vector<PeerRecord> PeerStore::peers_matching(const PeerFilter& filter) const {
  std::vector<PeerRecord> out;
  for_each_matching(filter, [&](const PeerRecord& p) { out.push_back(p); });
  return out;
}

std::optional<PeerRecord> PeerStore::find(Ipv4 ip) const {
  std::shared_lock lock(mu_);
  auto it = peers_.find(ip);
  if (it == peers_.end()) return std::nullopt;
  return it->second;
}

std::vector<SnapshotRecord> PeerStore::snapshots() const {
  std::shared_lock lock(mu_);
  return snapshots_;
}

std::uint64_t PeerStore::total_hits() const {
  std::shared_lock lock(mu_);
  return total_hits_;
}

} // namespace swarmwatch
