#include "cli/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "chartduel/config.hpp"
#include "chartduel/errors.hpp"
#include "chartduel/simulation.hpp"
#include "chartduel/stats.hpp"
#include "chartduel/store.hpp"
#include "chartduel/stream.hpp"
#include "chartduel/synthetic.hpp"
#include "chartduel/transcript.hpp"
#include "cli/manifest.hpp"

namespace chartduel::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// A check failed; reported as exit 1 with an optional line number.
struct Failure : std::runtime_error {
  Failure(const std::string& what, std::optional<std::size_t> line = std::nullopt,
          std::string file = {})
      : std::runtime_error(what), line(line), file(std::move(file)) {}
  std::optional<std::size_t> line;
  std::string file;
};

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Failure("cannot write " + p.string());
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::string data_dir;
  std::string csv;
  std::string codename;
  std::string description;
  std::string frequency = "daily";
  double practice_fraction = store::kPracticeFraction;
};

int do_ingest(const IngestArgs& a, std::ostream& out) {
  const auto freq = engine::mode_from_string(a.frequency);
  store::DatasetRegistry reg;
  if (fs::exists(fs::path(a.data_dir) / "registry.json")) reg = store::DatasetRegistry::load(a.data_dir);

  std::optional<series::PricePath> prices;
  try {
    prices = store::load_prices(a.csv, freq);
  } catch (const ParseError& e) {
    throw Failure(e.what(), e.line() ? std::optional<std::size_t>(e.line()) : std::nullopt, a.csv);
  }
  const auto slice = store::practice_slice_for(prices->size() - 1, a.practice_fraction);
  store::DatasetRecord rec{a.codename, a.description, freq, std::move(*prices), slice};
  try {
    reg.register_dataset(std::move(rec));
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  }
  fs::create_directories(a.data_dir);
  reg.save(a.data_dir);

  ojson j;
  j["registered"] = a.codename;
  j["datasets"] = ojson::array();
  for (const auto& d : reg.listing()) {
    j["datasets"].push_back({{"codename", d.codename},
                             {"frequency", engine::to_string(d.frequency)},
                             {"returns", d.return_count},
                             {"practice_returns", d.practice_returns}});
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---- contest setup shared by serve and simulate ------------------------------

std::vector<engine::ContestConfig> read_config(const std::string& path) {
  try {
    return config::load_contests(path);
  } catch (const ParseError& e) {
    throw Failure(e.what(), e.line() ? std::optional<std::size_t>(e.line()) : std::nullopt, path);
  }
}

// ---- serve -------------------------------------------------------------------

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
  std::string bind = "127.0.0.1:0";
  std::string config;
  std::string data_dir;
  std::string log;
  std::string transcripts;
  std::optional<std::int64_t> tick_interval_ms;
  std::optional<std::uint64_t> seed;
  double duration_s = 0;  // 0 = until SIGINT/SIGTERM
};

std::pair<std::string, std::uint16_t> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Usage("--bind expects HOST:PORT");
  const auto port = std::stoul(bind.substr(colon + 1));
  if (port > 65535) throw Usage("port out of range");
  return {bind.substr(0, colon), static_cast<std::uint16_t>(port)};
}

int do_serve(const ServeArgs& a, std::ostream& out) {
  auto contests = read_config(a.config);
  const auto reg = store::DatasetRegistry::load(a.data_dir);

  std::unique_ptr<store::EventLog> log;
  if (!a.log.empty()) log = std::make_unique<store::EventLog>(a.log);
  engine::Engine engine([&](const engine::GuessEvent& ev) {
    if (log) log->append(ev);
  });
  for (std::size_t k = 0; k < contests.size(); ++k) {
    auto& c = contests[k];
    if (a.tick_interval_ms) {
      c.tick_interval = std::chrono::milliseconds(*a.tick_interval_ms);
      c.guess_deadline.reset();  // rescale the default with the new interval
    }
    if (a.seed) c.seed = derive_seed(*a.seed, k);
    if (!reg.contains(c.dataset_codename))
      throw Failure("contest '" + c.contest_id + "' names unknown dataset '" + c.dataset_codename + "'");
    const auto split = store::split_returns(reg.get(c.dataset_codename));
    try {
      engine.create_contest(c, split.scoring, split.practice);
    } catch (const std::exception& e) {
      throw Failure("contest '" + c.contest_id + "': " + e.what());
    }
  }

  std::mutex tmu;
  std::ofstream transcripts;
  if (!a.transcripts.empty()) {
    transcripts.open(a.transcripts, std::ios::app);
    if (!transcripts) throw Failure("cannot open " + a.transcripts);
  }
  auto [host, port] = split_bind(a.bind);
  stream::ServerOptions opt;
  opt.host = host;
  opt.port = port;
  if (transcripts.is_open()) {
    opt.on_transcript = [&](std::size_t conn, const protocol::Transcript& t) {
      std::lock_guard lock(tmu);
      for (const auto& e : t) transcripts << protocol::encode_transcript_line(e, std::to_string(conn)) << "\n";
      transcripts.flush();
    };
  }
  stream::TcpServer server(engine, opt);
  server.start();
  out << "listening on " << host << ":" << server.port() << std::endl;

  g_stop = false;
  auto prev_int = std::signal(SIGINT, on_signal);
  auto prev_term = std::signal(SIGTERM, on_signal);
  const auto started = std::chrono::steady_clock::now();
  while (!g_stop) {
    if (a.duration_s > 0 &&
        std::chrono::steady_clock::now() - started >= std::chrono::duration<double>(a.duration_s))
      break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server.stop();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
  out << "served " << server.connections_served() << " connections" << std::endl;
  return kExitOk;
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string bot = "coin";
  std::string feature = "lag1";
  std::size_t sessions = 26;
  std::uint32_t charts = 35;
  std::uint32_t ppc = 80;
  std::uint32_t pps = 40;
  std::string mode = "daily";
  std::int64_t tick_interval_ms = 1000;
  std::uint64_t seed = 0;
  std::string synthetic = "iid";
  std::size_t returns = 0;
  std::string config;
  std::string contest;
  std::string data_dir;
  std::string dataset;
  bool no_feedback = false;
  double abstain_rate = 0.0;
  std::uint32_t guess_at = 1;
  double min_response_rate = stats::kDefaultMinResponseRate;
  std::string log;
  std::string transcripts;
  std::string report_json;
  std::string manifest;
  std::string format = "text";
};

ojson exclusions_json(const std::vector<stats::Exclusion>& ex) {
  ojson a = ojson::array();
  for (const auto& e : ex)
    a.push_back({{"subject_id", e.subject_id}, {"answered", e.answered}, {"assigned", e.assigned}});
  return a;
}

int do_simulate(const SimulateArgs& a, const CLI::App& cmd, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.seed = a.seed;
  manifest.tool_version = tool_version();

  sim::SimulationSpec spec;
  auto& c = spec.contest;
  if (!a.config.empty()) {
    auto all = read_config(a.config);
    manifest.config_path = a.config;
    manifest.add_input(a.config);
    auto it = std::find_if(all.begin(), all.end(), [&](const auto& x) {
      return a.contest.empty() || x.contest_id == a.contest;
    });
    if (it == all.end()) throw Failure("no contest '" + a.contest + "' in " + a.config);
    c = *it;
  } else {
    c.contest_id = "sim";
    c.dataset_codename = "Synthetic";
    c.seed = derive_seed(a.seed, 0);
  }
  // explicit flags override the config
  auto given = [&](const char* name) { return cmd.count(name) > 0 || a.config.empty(); };
  if (given("--charts")) c.charts_per_subject = a.charts;
  if (given("--points-per-chart")) c.points_per_chart = a.ppc;
  if (given("--points-per-screen")) c.points_per_screen = std::min(a.pps, c.points_per_chart);
  if (given("--mode")) c.mode = engine::mode_from_string(a.mode);
  if (given("--tick-interval-ms")) {
    c.tick_interval = std::chrono::milliseconds(a.tick_interval_ms);
    c.guess_deadline.reset();
  }
  if (cmd.count("--seed") && !a.config.empty()) c.seed = derive_seed(a.seed, 0);
  c.start_ms = std::min<engine::TimestampMs>(c.start_ms, 0);

  if (!a.dataset.empty() || !a.config.empty()) {
    if (a.data_dir.empty()) throw Usage("--data-dir is required with --dataset or --config");
    const auto reg = store::DatasetRegistry::load(a.data_dir);
    manifest.add_input(fs::path(a.data_dir) / "registry.json");
    const auto code = a.dataset.empty() ? c.dataset_codename : a.dataset;
    if (!reg.contains(code)) throw Failure("unknown dataset '" + code + "'");
    manifest.add_input(fs::path(a.data_dir) / (code + ".csv"));
    auto split = store::split_returns(reg.get(code));
    c.dataset_codename = code;
    spec.scoring = std::move(split.scoring);
    spec.practice = std::move(split.practice);
  } else {
    std::size_t n = a.returns;
    if (n == 0) {
      n = c.mode == engine::Mode::kTick
              ? a.sessions * static_cast<std::size_t>(c.charts_per_subject) * c.points_per_chart
              : std::max<std::size_t>(5000, static_cast<std::size_t>(c.charts_per_subject) * c.points_per_chart);
    }
    try {
      spec.scoring = synthetic::generate(a.synthetic, n, derive_seed(a.seed, 1));
    } catch (const std::invalid_argument& e) {
      throw Usage(e.what());
    }
  }

  spec.bot = sim::bot_kind_from_string(a.bot);
  spec.feature = bots::feature_from_string(a.feature);
  spec.sessions = a.sessions;
  spec.seed = a.seed;
  spec.feedback = !a.no_feedback;
  spec.coin_guess_point = a.guess_at;
  spec.abstain_rate = a.abstain_rate;
  spec.min_response_rate = a.min_response_rate;
  spec.record_wire = !a.transcripts.empty();

  std::unique_ptr<store::EventLog> log;
  if (!a.log.empty()) {
    if (fs::exists(a.log)) fs::remove(a.log);  // a simulation owns its log
    log = std::make_unique<store::EventLog>(a.log);
    spec.event_log = log.get();
    manifest.outputs.push_back(a.log);
  }

  sim::SimulationOutcome result;
  try {
    result = sim::simulate_contest(spec);
  } catch (const CapacityError& e) {
    throw Failure(std::string(e.what()) + " (max feasible " + std::to_string(e.max_feasible()) + ")");
  } catch (const std::invalid_argument& e) {
    throw Failure(e.what());
  } catch (const StateError& e) {
    throw Failure(e.what());
  }

  if (!a.transcripts.empty()) {
    std::ostringstream t;
    for (std::size_t k = 0; k < result.transcripts.size(); ++k)
      for (const auto& e : result.transcripts[k]) t << protocol::encode_transcript_line(e, std::to_string(k)) << "\n";
    write_file(a.transcripts, t.str());
    manifest.outputs.push_back(a.transcripts);
  }

  double acc_sum = 0;
  std::size_t acc_n = 0;
  for (const auto& b : result.bots) {
    if (b.outcomes.size() > 5) {
      acc_sum += b.accuracy_after(5);
      ++acc_n;
    }
  }

  ojson report;
  report["bot"] = a.bot;
  if (spec.bot == sim::BotKind::kLearning) {
    report["feature"] = a.feature;
    report["feedback"] = spec.feedback;
  }
  report["sessions"] = a.sessions;
  report["seed"] = a.seed;
  report["contest"] = result.live.result ? ojson::parse(stats::format_json(*result.live.result)) : ojson();
  report["excluded"] = exclusions_json(result.live.excluded);
  report["accuracy_after_warmup"] = acc_n ? acc_sum / static_cast<double>(acc_n) : 0.0;
  report["events"] = result.events.size();

  if (!a.report_json.empty()) {
    write_file(a.report_json, report.dump(2) + "\n");
    manifest.outputs.push_back(a.report_json);
  }
  if (a.format == "json") {
    out << report.dump(2) << "\n";
  } else {
    out << "simulation: " << a.sessions << " " << a.bot << " bots, seed " << a.seed << "\n";
    if (result.live.result) {
      out << stats::format_text(*result.live.result);
    } else {
      out << "  no subject met the response-rate threshold\n";
    }
    for (const auto& e : result.live.excluded)
      out << "  excluded " << e.subject_id << " (answered " << e.answered << " of " << e.assigned << ")\n";
    if (acc_n) {
      out << "  mean accuracy after 5 warm-up trials  "
          << stats::format_percent(100.0 * acc_sum / static_cast<double>(acc_n)) << "\n";
    }
  }
  if (!a.manifest.empty()) write_file(a.manifest, manifest.to_json().dump(2) + "\n");
  return kExitOk;
}

// ---- report ------------------------------------------------------------------

struct ReportArgs {
  std::string log;
  std::string contest;
  std::string format = "text";
  double min_response_rate = stats::kDefaultMinResponseRate;
  std::optional<std::int64_t> charts;
};

store::LogReadResult read_log_or_fail(const std::string& path) {
  auto r = store::read_event_log(path);
  if (!r.errors.empty()) throw Failure(r.errors.front().message, r.errors.front().line, path);
  return r;
}

int do_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const auto log = read_log_or_fail(a.log);
  if (log.partial_line) {
    err << ojson{{"warning", "ignoring truncated final line"}, {"file", a.log}, {"line", *log.partial_line}}.dump()
        << "\n";
  }
  auto replayed = store::replay(log.events, a.min_response_rate, a.charts);
  if (!a.contest.empty()) {
    if (!replayed.count(a.contest)) throw Failure("no events for contest '" + a.contest + "'");
    auto one = std::move(replayed.at(a.contest));
    replayed.clear();
    replayed.emplace(a.contest, std::move(one));
  }
  ojson all = ojson::array();
  for (const auto& [id, rc] : replayed) {
    if (a.format == "json") {
      ojson j;
      j["contest_id"] = id;
      j["result"] = rc.result ? ojson::parse(stats::format_json(*rc.result)) : ojson();
      j["excluded"] = exclusions_json(rc.excluded);
      j["incomplete_sessions"] = rc.incomplete_sessions;
      const auto sub = stats::subgroup_accuracy(rc.records);
      j["finance_percent"] = sub.finance_percent ? ojson(*sub.finance_percent) : ojson();
      j["other_percent"] = sub.other_percent ? ojson(*sub.other_percent) : ojson();
      all.push_back(std::move(j));
      continue;
    }
    if (rc.result) {
      auto r = *rc.result;
      r.contest_id = id;
      out << stats::format_text(r);
    } else {
      out << "contest " << id << "\n  no complete sessions\n";
    }
    for (const auto& e : rc.excluded)
      out << "  excluded " << e.subject_id << " (answered " << e.answered << " of " << e.assigned << ")\n";
    for (const auto& s : rc.incomplete_sessions) out << "  incomplete session " << s << "\n";
  }
  if (a.format == "json") out << all.dump(2) << "\n";
  return kExitOk;
}

// ---- validate-log ------------------------------------------------------------

struct ValidateArgs {
  std::string log;
  std::string transcripts;
  std::string expect;
  double min_response_rate = stats::kDefaultMinResponseRate;
};

// Per-line checks a replay cannot see: session identity, time order,
// duplicate trials, and outcome arithmetic.
void check_events(const store::LogReadResult& log, const std::string& path) {
  struct Seen {
    std::string contest, subject;
    bool practice = false;
    stats::Profession profession = stats::Profession::kUndeclared;
    engine::TimestampMs last = 0;
  };
  std::map<std::string, Seen> sessions;
  std::set<std::string> trials;
  // read_event_log keeps complete lines in order; blank lines are skipped, so
  // map event k back to its physical line number.
  std::vector<std::size_t> line_of;
  {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (!line.empty()) line_of.push_back(n);
    }
  }
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    const auto& e = log.events[k];
    const std::size_t line = k < line_of.size() ? line_of[k] : k + 1;
    auto [it, fresh] = sessions.try_emplace(e.session_id, Seen{e.contest_id, e.subject_id, e.practice, e.profession, e.timestamp});
    if (!fresh) {
      if (it->second.contest != e.contest_id || it->second.subject != e.subject_id ||
          it->second.practice != e.practice || it->second.profession != e.profession)
        throw Failure("session " + e.session_id + " changes contest, subject, practice or profession", line, path);
      if (e.timestamp <= it->second.last)
        throw Failure("timestamps not increasing in session " + e.session_id, line, path);
      it->second.last = e.timestamp;
    }
    if (!trials.insert(e.trial_id).second) throw Failure("duplicate trial " + e.trial_id, line, path);
    const bool correct = e.choice != engine::Choice::kTimeout &&
                         (e.choice == engine::Choice::kTop) == (e.placement == engine::Placement::kRealOnTop);
    if ((e.outcome == engine::Outcome::kCorrect) != correct)
      throw Failure("outcome of " + e.trial_id + " disagrees with choice and placement", line, path);
  }
}

void check_transcripts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path);
  std::map<std::string, protocol::Transcript> by_conn;
  std::map<std::string, std::vector<std::size_t>> lines;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const auto dir = j.at("dir").get<std::string>();
      if (dir != "c2s" && dir != "s2c") throw std::invalid_argument("dir");
      const auto conn = j.at("connection").get<std::string>();
      const auto& f = j.at("frame");
      by_conn[conn].push_back({dir == "c2s" ? protocol::Direction::kClientToServer
                                            : protocol::Direction::kServerToClient,
                               f.is_string() ? f.get<std::string>() : f.dump()});
      lines[conn].push_back(n);
    } catch (const std::exception&) {
      throw Failure("unreadable transcript line", n, path);
    }
  }
  for (const auto& [conn, t] : by_conn) {
    const auto report = protocol::validate_transcript(t);
    if (report.ok()) continue;
    const auto& v = report.violations.front();
    const auto& ls = lines[conn];
    const std::size_t at = v.index < ls.size() ? ls[v.index] : (ls.empty() ? 0 : ls.back());
    throw Failure("connection " + conn + ": " + v.code + ": " + v.detail, at, path);
  }
}

int do_validate(const ValidateArgs& a, std::ostream& out) {
  const auto log = read_log_or_fail(a.log);
  if (log.partial_line) throw Failure("truncated final line", *log.partial_line, a.log);
  check_events(log, a.log);
  const auto replayed = store::replay(log.events, a.min_response_rate);
  if (!a.transcripts.empty()) check_transcripts(a.transcripts);

  if (!a.expect.empty()) {
    std::ifstream in(a.expect);
    nlohmann::json want;
    try {
      want = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
      throw Failure(std::string("unreadable expected report: ") + e.what(), std::nullopt, a.expect);
    }
    const auto& wc = want.at("contest");
    const auto id = wc.at("contest_id").get<std::string>();
    if (!replayed.count(id) || !replayed.at(id).result) throw Failure("log has no complete sessions for " + id);
    const auto got = nlohmann::json::parse(stats::format_json(*replayed.at(id).result));
    for (const auto& [k, v] : wc.items()) {
      if (got.value(k, nlohmann::json()) != v)
        throw Failure("replayed " + k + " " + got.value(k, nlohmann::json()).dump() + " != reported " + v.dump());
    }
  }

  ojson j;
  j["ok"] = true;
  j["events"] = log.events.size();
  j["contests"] = ojson::object();
  for (const auto& [id, rc] : replayed) {
    j["contests"][id] = {{"subjects", rc.result ? rc.result->subjects : 0},
                         {"correct_guesses", rc.result ? rc.result->correct_guesses : 0},
                         {"trials", rc.result ? rc.result->trials : 0},
                         {"incomplete_sessions", rc.incomplete_sessions.size()}};
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

void print_failure(std::ostream& err, const char* kind, const std::string& what,
                   std::optional<std::size_t> line = std::nullopt, const std::string& file = {}) {
  ojson j;
  j["error"] = kind;
  j["message"] = what;
  if (!file.empty()) j["file"] = file;
  if (line) j["line"] = *line;
  err << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"chartduel: real-versus-surrogate chart experiments", "chartduel"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Register a CSV price series under a codename");
  ingest->add_option("--data-dir", ia.data_dir, "Dataset registry directory")->required();
  ingest->add_option("--csv", ia.csv, "date,price or timestamp,price file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--codename", ia.codename, "Public name shown to subjects")->required();
  ingest->add_option("--description", ia.description, "Private source description")->required();
  ingest->add_option("--frequency", ia.frequency, "daily or tick")->check(CLI::IsMember({"daily", "tick"}));
  ingest->add_option("--practice-fraction", ia.practice_fraction, "Final share reserved for practice")
      ->check(CLI::Range(0.0, 0.5));

  ServeArgs sa;
  std::int64_t serve_tick = 0;
  std::uint64_t serve_seed = 0;
  auto* serve = app.add_subcommand("serve", "Run the stream server");
  serve->add_option("--bind", sa.bind, "HOST:PORT (port 0 picks a free one)");
  serve->add_option("--config", sa.config, "Contest INI file")->required()->check(CLI::ExistingFile);
  serve->add_option("--data-dir", sa.data_dir, "Dataset registry directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--log", sa.log, "Append guess events to this JSONL file");
  serve->add_option("--transcripts", sa.transcripts, "Append per-frame transcript lines here");
  auto* tick_opt = serve->add_option("--tick-interval-ms", serve_tick, "Override every contest's tick interval")
                       ->check(CLI::PositiveNumber);
  auto* seed_opt = serve->add_option("--seed", serve_seed, "Deterministic master seed for all contests");
  serve->add_option("--duration-s", sa.duration_s, "Stop after this many seconds (0 = until signalled)");

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "Run bot subjects through the protocol");
  simulate->add_option("--bot", ma.bot, "coin or learning")->check(CLI::IsMember({"coin", "learning"}));
  simulate->add_option("--feature", ma.feature, "lag1 or abs-lag1")->check(CLI::IsMember({"lag1", "abs-lag1"}));
  simulate->add_option("--sessions", ma.sessions, "Number of bot subjects")->check(CLI::PositiveNumber);
  simulate->add_option("--charts", ma.charts, "Charts per subject")->check(CLI::PositiveNumber);
  simulate->add_option("--points-per-chart", ma.ppc)->check(CLI::Range(2u, 100000u));
  simulate->add_option("--points-per-screen", ma.pps)->check(CLI::PositiveNumber);
  simulate->add_option("--mode", ma.mode, "daily or tick")->check(CLI::IsMember({"daily", "tick"}));
  simulate->add_option("--tick-interval-ms", ma.tick_interval_ms)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", ma.seed, "Master seed; the run is a pure function of it");
  simulate->add_option("--synthetic", ma.synthetic, "iid, ar1:<phi> or ar1-shuffled:<phi>:<chunk>");
  simulate->add_option("--returns", ma.returns, "Synthetic series length (default: enough for the run)");
  simulate->add_option("--config", ma.config, "Contest INI file")->check(CLI::ExistingFile);
  simulate->add_option("--contest", ma.contest, "Contest id within --config");
  simulate->add_option("--data-dir", ma.data_dir, "Dataset registry directory")->check(CLI::ExistingDirectory);
  simulate->add_option("--dataset", ma.dataset, "Registered codename to play on");
  simulate->add_flag("--no-feedback", ma.no_feedback, "Learning bots never see feedback");
  simulate->add_option("--abstain-rate", ma.abstain_rate, "Share of trials left to time out")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--guess-at", ma.guess_at, "Coin bots guess once this many points are shown");
  simulate->add_option("--min-response-rate", ma.min_response_rate)->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--log", ma.log, "Write guess events to this JSONL file");
  simulate->add_option("--transcripts", ma.transcripts, "Write wire transcripts here");
  simulate->add_option("--report-json", ma.report_json, "Also write the report as JSON");
  simulate->add_option("--manifest", ma.manifest, "Write a run manifest");
  simulate->add_option("--format", ma.format)->check(CLI::IsMember({"text", "json"}));

  ReportArgs ra;
  std::int64_t report_charts = 0;
  auto* report = app.add_subcommand("report", "Contest results and p-values from an event log");
  report->add_option("--log", ra.log, "Event log")->required()->check(CLI::ExistingFile);
  report->add_option("--contest", ra.contest, "Only this contest");
  report->add_option("--format", ra.format)->check(CLI::IsMember({"text", "json"}));
  report->add_option("--min-response-rate", ra.min_response_rate)->check(CLI::Range(0.0, 1.0));
  auto* charts_opt = report->add_option("--charts", report_charts, "Charts per subject (default: inferred)")
                         ->check(CLI::PositiveNumber);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate-log", "Check an event log (and transcripts)");
  validate->add_option("--log", va.log, "Event log")->required()->check(CLI::ExistingFile);
  validate->add_option("--transcripts", va.transcripts, "Transcript file to check")->check(CLI::ExistingFile);
  validate->add_option("--expect", va.expect, "simulate --report-json output to compare against")
      ->check(CLI::ExistingFile);
  validate->add_option("--min-response-rate", va.min_response_rate)->check(CLI::Range(0.0, 1.0));

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    print_failure(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (*ingest) return do_ingest(ia, out);
    if (*serve) {
      if (*tick_opt) sa.tick_interval_ms = serve_tick;
      if (*seed_opt) sa.seed = serve_seed;
      return do_serve(sa, out);
    }
    if (*simulate) return do_simulate(ma, *simulate, out);
    if (*report) {
      if (*charts_opt) ra.charts = report_charts;
      return do_report(ra, out, err);
    }
    if (*validate) return do_validate(va, out);
  } catch (const Usage& e) {
    print_failure(err, "usage", e.what());
    return kExitUsage;
  } catch (const Failure& e) {
    print_failure(err, "failure", e.what(), e.line, e.file);
    return kExitFailure;
  } catch (const std::exception& e) {
    print_failure(err, "failure", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace chartduel::cli
