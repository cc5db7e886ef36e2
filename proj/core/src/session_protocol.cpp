#include <chrono>

#include "chartduel/errors.hpp"
#include "chartduel/stream.hpp"

namespace chartduel::stream {

using protocol::Kind;
using json = nlohmann::json;

TimestampMs system_now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

SessionProtocol::SessionProtocol(engine::Engine& engine, bool record_transcript)
    : engine_(engine), record_(record_transcript) {}

void SessionProtocol::send(std::vector<std::string>& out, Kind kind, json body) {
  protocol::Message m{kind, ++seq_, std::move(body)};
  out.push_back(protocol::encode(m));
  if (record_) transcript_.push_back({protocol::Direction::kServerToClient, out.back()});
}

void SessionProtocol::send_error(std::vector<std::string>& out, std::string_view code,
                                 const std::string& message, bool fatal) {
  send(out, Kind::kError, {{"code", code}, {"message", message}, {"fatal", fatal}});
}

std::vector<std::string> SessionProtocol::on_frame(std::string_view frame, TimestampMs now) {
  std::vector<std::string> out;
  if (record_) transcript_.push_back({protocol::Direction::kClientToServer, std::string(frame)});
  if (closed()) return out;
  protocol::Message m;
  try {
    m = protocol::decode(frame, protocol::Direction::kClientToServer);
  } catch (const protocol::ProtocolError& e) {
    send_error(out, protocol::kErrMalformed, e.what(), true);
    close(now);
    return out;
  }
  handle(m, out, now);
  return out;
}

void SessionProtocol::handle(const protocol::Message& m, std::vector<std::string>& out,
                             TimestampMs now) {
  switch (m.kind) {
    case Kind::kHello: {
      if (phase_ != Phase::kAwaitHello) {
        send_error(out, protocol::kErrState, "hello already received", false);
        return;
      }
      subject_id_ = m.body["subject_id"].get<std::string>();
      if (subject_id_.empty()) {
        send_error(out, protocol::kErrMalformed, "empty subject_id", true);
        close(now);
        return;
      }
      try {
        profession_ = stats::profession_from_string(m.body.value("profession", std::string{}));
      } catch (const std::invalid_argument& e) {
        send_error(out, protocol::kErrMalformed, e.what(), true);
        close(now);
        return;
      }
      json contests = json::array();
      for (const auto& c : engine_.contests()) {
        contests.push_back({{"contest_id", c.contest_id},
                            {"codename", c.codename},
                            {"mode", engine::to_string(c.mode)},
                            {"points_per_chart", c.points_per_chart},
                            {"points_per_screen", c.points_per_screen},
                            {"charts_per_subject", c.charts_per_subject},
                            {"tick_interval_ms", c.tick_interval_ms},
                            {"guess_deadline_ms", c.guess_deadline_ms},
                            {"practice_available", c.practice_available}});
      }
      phase_ = Phase::kAwaitOpen;
      send(out, Kind::kContestList, {{"contests", std::move(contests)}});
      return;
    }
    case Kind::kSessionOpen: {
      if (phase_ != Phase::kAwaitOpen) {
        send_error(out, protocol::kErrState, "session_open not expected now", false);
        return;
      }
      const auto contest_id = m.body["contest_id"].get<std::string>();
      const bool practice = m.body.value("practice", false);
      try {
        session_id_ = engine_.start_session(subject_id_, contest_id, practice, now, profession_);
        assigned_ = engine_.contest_info(contest_id).charts_per_subject;
      } catch (const StateError& e) {
        send_error(out, protocol::kErrRejected, e.what(), false);
        return;
      }
      phase_ = Phase::kRunning;
      send(out, Kind::kSessionOpen,
           {{"session_id", session_id_},
            {"contest_id", contest_id},
            {"practice", practice},
            {"charts", assigned_}});
      start_trial(out, now);
      return;
    }
    case Kind::kGuess: {
      if (phase_ != Phase::kRunning || !trial_) {
        send_error(out, protocol::kErrState, "no trial is open", false);
        return;
      }
      const auto trial_id = m.body["trial_id"].get<std::string>();
      if (trial_id != trial_->trial_id) {
        send_error(out, protocol::kErrRejected, "guess for trial '" + trial_id +
                                                    "' but the open trial is '" +
                                                    trial_->trial_id + "'",
                   false);
        return;
      }
      engine::Feedback fb;
      try {
        fb = engine_.submit_guess(session_id_, trial_id,
                                  engine::slot_from_string(m.body["choice"].get<std::string>()),
                                  now);
      } catch (const StateError& e) {
        send_error(out, protocol::kErrRejected, e.what(), false);
        return;
      }
      ++answered_;
      score_ = fb.score;
      send(out, Kind::kFeedback,
           {{"trial_id", trial_id},
            {"outcome", engine::to_string(fb.outcome)},
            {"real_slot", engine::to_string(fb.real_slot)},
            {"score", fb.score}});
      end_trial(out, engine::to_string(fb.outcome), now);
      return;
    }
    default:
      send_error(out, protocol::kErrMalformed, "unexpected kind " + protocol::to_string(m.kind),
                 true);
      close(now);
  }
}

void SessionProtocol::start_trial(std::vector<std::string>& out, TimestampMs now) {
  trial_ = engine_.begin_trial(session_id_, now);
  trial_started_ = now;
  next_point_ = 1;
  streaming_done_ = false;
  send(out, Kind::kTrialStart,
       {{"trial_id", trial_->trial_id},
        {"index", trial_->index},
        {"points_per_chart", trial_->window.points_per_chart},
        {"points_per_screen", trial_->window.points_per_screen},
        {"tick_interval_ms", trial_->window.tick_interval.count()},
        {"guess_deadline_ms", trial_->guess_deadline.count()},
        {"base_price", trial_->top.front()}});
}

void SessionProtocol::end_trial(std::vector<std::string>& out, const std::string& outcome,
                                TimestampMs now) {
  send(out, Kind::kTrialEnd, {{"trial_id", trial_->trial_id}, {"outcome", outcome}});
  trial_.reset();
  ++done_;
  if (done_ >= assigned_) {
    send(out, Kind::kSessionEnd,
         {{"session_id", session_id_},
          {"score", score_},
          {"answered", answered_},
          {"assigned", assigned_}});
    phase_ = Phase::kClosed;
    return;
  }
  start_trial(out, now);
}

std::vector<std::string> SessionProtocol::on_timer(TimestampMs now) {
  std::vector<std::string> out;
  if (phase_ != Phase::kRunning || !trial_) return out;
  const auto interval = trial_->window.tick_interval.count();
  const auto ppc = trial_->window.points_per_chart;
  while (next_point_ <= ppc && trial_started_ + next_point_ * interval <= now) {
    send(out, Kind::kTick,
         {{"trial_id", trial_->trial_id},
          {"slot", "top"},
          {"point_index", next_point_},
          {"price", trial_->top[next_point_]}});
    send(out, Kind::kTick,
         {{"trial_id", trial_->trial_id},
          {"slot", "bottom"},
          {"point_index", next_point_},
          {"price", trial_->bottom[next_point_]}});
    ++next_point_;
  }
  if (next_point_ > ppc && !streaming_done_) {
    engine_.finish_streaming(session_id_, trial_->trial_id);
    streaming_done_ = true;
  }
  if (now >= trial_started_ + trial_->guess_deadline.count()) {
    engine_.expire_trial(session_id_, trial_->trial_id, now);
    end_trial(out, "timeout", now);
  }
  return out;
}

std::optional<TimestampMs> SessionProtocol::next_wakeup() const {
  if (phase_ != Phase::kRunning || !trial_) return std::nullopt;
  const TimestampMs deadline = trial_started_ + trial_->guess_deadline.count();
  if (next_point_ <= trial_->window.points_per_chart) {
    return std::min(deadline, trial_started_ + next_point_ * trial_->window.tick_interval.count());
  }
  return deadline;
}

void SessionProtocol::on_disconnect(TimestampMs now) { close(now); }

void SessionProtocol::close(TimestampMs now) {
  if (phase_ == Phase::kRunning) engine_.forfeit(session_id_, now);
  trial_.reset();
  phase_ = Phase::kClosed;
}

}  // namespace chartduel::stream
