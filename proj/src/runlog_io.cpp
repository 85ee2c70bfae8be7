#include "metasched/runlog_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "metasched/errors.hpp"

namespace metasched {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double value) {
  if (!std::isfinite(value)) throw NumericError("cannot serialize a non-finite value");
  return fmt::format("{:.17g}", value);
}

namespace {

template <typename T, typename F>
void append_array(std::string& out, std::span<const T> values, F&& fmt_one) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += fmt_one(values[i]);
  }
  out += ']';
}

std::string fixed_units(long long units, int decimals) {
  long long scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  return fmt::format("{}.{:0{}d}", units / scale, units % scale, decimals);
}

}  // namespace

std::string runlog_line(const CycleRecord& r) {
  std::string line = fmt::format(R"({{"cycle":{},"step":{},"probs":)", r.cycle, r.step);
  append_array<double>(line, r.probabilities, format_double);
  line += R"(,"counts":)";
  append_array<std::size_t>(line, r.counts, [](std::size_t c) { return std::to_string(c); });
  line += R"(,"losses":)";
  append_array<double>(line, r.losses, format_double);
  line += fmt::format(R"(,"reward":{},"entropy":{}}})", format_double(r.reward),
                      format_double(r.entropy));
  return line;
}

void write_runlog_jsonl(std::ostream& out, const RunLog& log) {
  for (const auto& r : log.records) out << runlog_line(r) << '\n';
}

std::vector<CycleRecord> read_runlog_jsonl(std::istream& in) {
  std::vector<CycleRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      CycleRecord r;
      r.cycle = j.at("cycle").get<std::size_t>();
      r.step = j.at("step").get<std::size_t>();
      r.probabilities = j.at("probs").get<std::vector<double>>();
      r.counts = j.at("counts").get<std::vector<std::size_t>>();
      r.losses = j.at("losses").get<std::vector<double>>();
      r.reward = j.at("reward").get<double>();
      r.entropy = j.at("entropy").get<double>();
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw InvalidArgument(fmt::format("runlog line {}: {}", line_no, e.what()));
    }
  }
  return records;
}

std::vector<long long> round_simplex(std::span<const double> probs, int decimals) {
  long long scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);

  std::vector<long long> units(probs.size());
  std::vector<double> remainder(probs.size());
  long long assigned = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double exact = probs[i] / total * static_cast<double>(scale);
    units[i] = static_cast<long long>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(units[i]);
    assigned += units[i];
  }
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < scale && k < order.size(); ++k, ++assigned) {
    ++units[order[k]];
  }
  return units;
}

void write_weights_csv(std::ostream& out, const RunLog& log) {
  const std::size_t m = log.num_objectives();
  out << "cycle,step";
  for (std::size_t i = 0; i < m; ++i) out << ",p" << i;
  out << '\n';
  for (const auto& r : log.records) {
    out << r.cycle << ',' << r.step;
    for (const long long u : round_simplex(r.probabilities, 6)) out << ',' << fixed_units(u, 6);
    out << '\n';
  }
}

void write_frequencies_csv(std::ostream& out, const RunLog& log) {
  const std::size_t m = log.num_objectives();
  out << "cycle,step";
  for (std::size_t i = 0; i < m; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& r : log.records) {
    out << r.cycle << ',' << r.step;
    std::vector<double> freq(r.counts.begin(), r.counts.end());
    for (const long long u : round_simplex(freq, 6)) out << ',' << fixed_units(u, 6);
    out << '\n';
  }
}

void write_reward_diff_csv(std::ostream& out, std::span<const double> raw,
                           std::span<const double> smoothed) {
  if (raw.size() != smoothed.size()) {
    throw InvalidArgument("raw and smoothed series differ in length");
  }
  out << "cycle,diff_raw,diff_smoothed\n";
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out << fmt::format("{},{:.6g},{:.6g}\n", i, raw[i], smoothed[i]);
  }
}

ordered_json policy_to_json(const SamplingPolicy& policy) {
  ordered_json j;
  j["m"] = policy.size();
  j["logits"] = std::vector<double>(policy.logits().begin(), policy.logits().end());
  return j;
}

SamplingPolicy policy_from_json(const json& doc) {
  try {
    const auto m = doc.at("m").get<std::size_t>();
    auto logits = doc.at("logits").get<std::vector<double>>();
    if (logits.size() != m) {
      throw InvalidArgument(fmt::format("policy declares m={} but has {} logits", m,
                                        logits.size()));
    }
    return SamplingPolicy::from_logits(std::move(logits));
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("malformed policy record: {}", e.what()));
  }
}

ordered_json run_summary_json(const RunLog& log) {
  ordered_json j;
  j["sampler"] = std::string(to_string(log.config.sampler));
  j["seed"] = log.config.seed;
  j["cycles"] = log.records.size();
  j["steps"] = log.records.size() * log.config.meta_length;
  j["evaluate_calls"] = log.evaluate_calls;
  j["initial_losses"] = log.initial_losses;
  const auto& terminal = log.records.empty() ? log.initial_losses : log.records.back().losses;
  j["terminal_losses"] = terminal;
  j["terminal_summed_loss"] = terminal_summed_loss(log);
  double total_reward = 0.0;
  for (const auto& r : log.records) total_reward += r.reward;
  j["total_reward"] = total_reward;
  if (!log.records.empty()) {
    j["averaged_sampling_weights"] = averaged_sampling_weights(log);
    j["averaged_sample_frequencies"] = averaged_sample_frequencies(log);
    j["mean_entropy"] = mean_entropy(log);
  }
  if (log.final_policy) j["final_policy"] = policy_to_json(*log.final_policy);
  return j;
}

}  // namespace metasched
