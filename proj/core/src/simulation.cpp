#include "chartduel/simulation.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

#include "chartduel/errors.hpp"
#include "chartduel/stream.hpp"

namespace chartduel::sim {

std::string to_string(BotKind k) { return k == BotKind::kCoin ? "coin" : "learning"; }

BotKind bot_kind_from_string(const std::string& s) {
  if (s == "coin") return BotKind::kCoin;
  if (s == "learning") return BotKind::kLearning;
  throw std::invalid_argument("unknown bot '" + s + "' (expected coin or learning)");
}

SimulationOutcome simulate_contest(const SimulationSpec& spec) {
  SimulationOutcome out;
  engine::Engine engine([&](const engine::GuessEvent& e) {
    out.events.push_back(e);
    if (spec.event_log) spec.event_log->append(e);
  });
  engine.create_contest(spec.contest, spec.scoring, spec.practice);
  // Bots past the pool size would only be turned away; say so up front.
  if (const auto left = engine.plans_remaining(spec.contest.contest_id); left && *left < spec.sessions) {
    throw CapacityError("tick-mode pool holds " + std::to_string(*left) + " plans for " +
                            std::to_string(spec.sessions) + " sessions",
                        *left);
  }

  std::vector<std::unique_ptr<bots::BotClient>> clients;
  clients.reserve(spec.sessions);
  for (std::size_t i = 0; i < spec.sessions; ++i) {
    const std::uint64_t bot_seed = derive_seed(spec.seed, i);
    std::unique_ptr<bots::GuessStrategy> strategy;
    if (spec.bot == BotKind::kCoin) {
      strategy = std::make_unique<bots::CoinStrategy>(bot_seed, spec.coin_guess_point);
    } else {
      strategy = std::make_unique<bots::LearningStrategy>(
          bots::BotPolicy::make("learner-" + std::to_string(i), spec.feature, bot_seed),
          spec.feedback);
    }
    if (spec.abstain_rate > 0.0) {
      strategy = std::make_unique<bots::AbstainingStrategy>(std::move(strategy), spec.abstain_rate,
                                                            derive_seed(~spec.seed, i));
    }
    char name[32];
    std::snprintf(name, sizeof name, "bot-%04zu", i);
    clients.push_back(std::make_unique<bots::BotClient>(
        bots::BotClientOptions{name, spec.contest.contest_id, false, stats::Profession::kUndeclared},
        std::move(strategy)));
  }

  stream::VirtualHub hub(engine, spec.contest.start_ms, spec.record_wire);
  for (auto& c : clients) hub.connect(*c);
  hub.run();

  out.finished_at = hub.now();
  out.live = engine.live_result(spec.contest.contest_id, spec.min_response_rate);
  out.leaderboard = engine.leaderboard(spec.contest.contest_id);
  for (const auto& c : clients) out.bots.push_back(c->record());
  if (spec.record_wire) {
    for (std::size_t i = 0; i < clients.size(); ++i) out.transcripts.push_back(hub.demultiplex(i));
  }
  return out;
}

}  // namespace chartduel::sim
