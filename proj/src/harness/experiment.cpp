#include "polyfree/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "polyfree/harness/io.hpp"
#include "polyfree/objectives.hpp"

namespace polyfree::harness {

using nlohmann::json;

std::size_t worker_count(std::optional<std::size_t> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("POLYFREE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<Vector> scaled_samples(const Vector& x0, std::size_t n) {
  std::vector<Vector> samples;
  samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1);
    Vector x(x0.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = s * x0[i];
    samples.push_back(std::move(x));
  }
  return samples;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return xs;
}

}  // namespace

RunOutcome execute_run(const RunConfig& config) {
  const auto objective = make_objective(config.objective);
  StepsizeRule rule(config.rule);
  const RuleKind kind = rule.kind();
  RunOutcome outcome;
  outcome.result = run(*objective, rule, config.x0, config.iterations, config.options);

  const auto opt = objective->optimum();
  const auto smooth = objective->smoothness();
  for (VerifyCheck check : config.verify) {
    switch (check) {
      case VerifyCheck::LemmaA1:
        outcome.checks.push_back(check_lemma_a1(*objective, scaled_samples(config.x0, 101)));
        break;
      case VerifyCheck::LemmaA2:
        outcome.checks.push_back(check_lemma_a2(*objective, scaled_samples(config.x0, 201)));
        break;
      case VerifyCheck::HessianCertificate: {
        const double r = config.objective.box_radius.value_or(1.0);
        outcome.checks.push_back(check_hessian_certificate(
            config.objective.L0, config.objective.L1, linspace(-r, r, 501)));
        break;
      }
      case VerifyCheck::Prop31:
        outcome.checks.push_back(
            check_prop_3_1(outcome.result.trace, kind, smooth->L0, smooth->L1, opt->f));
        break;
      case VerifyCheck::DistanceMonotone: {
        DistanceCheckParams params{kind, opt->f};
        if (auto floor = rule.floor()) params.l_star = *floor;
        params.horizon = config.iterations;
        outcome.checks.push_back(check_distance_monotone(outcome.result.trace, params));
        break;
      }
      case VerifyCheck::Envelope: {
        const double l_star = *rule.floor();
        EnvelopeParams p{smooth->L0,
                         smooth->L1,
                         smooth->L,
                         squared_distance(config.x0, opt->x),
                         opt->f - l_star,
                         config.iterations};
        outcome.checks.push_back(check_inexact_polyak_envelope(outcome.result, opt->f, p));
        break;
      }
    }
  }
  return outcome;
}

json report_entry(const RunConfig& config, const RunOutcome& outcome, const std::string& trace_csv) {
  const RunResult& r = outcome.result;
  json entry;
  entry["label"] = config.label;
  entry["objective"] = to_json(config.objective);
  entry["rule"] = to_json(config.rule);
  entry["x0"] = config.x0;
  entry["T"] = config.iterations;
  entry["status"] = std::string(to_string(r.status));
  entry["steps"] = r.trace.size() - 1;
  entry["best_f"] = r.best_f;
  entry["best_index"] = r.best_index;
  entry["final_f"] = r.final_f();
  entry["f_star"] = config.objective.f_star;
  if (auto floor = StepsizeRule(config.rule).floor()) {
    entry["floor"] = *floor;
  } else {
    entry["floor"] = nullptr;
  }
  entry["trace_csv"] = trace_csv;
  json checks = json::array();
  for (const CheckReport& c : outcome.checks) checks.push_back(to_json(c));
  entry["checks"] = std::move(checks);
  return entry;
}

json run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  std::vector<RunOutcome> outcomes(config.runs.size());
  parallel_for(config.runs.size(), worker_count(config.workers),
               [&](std::size_t i) { outcomes[i] = execute_run(config.runs[i]); });

  json report;
  report["schema"] = kReportSchema;
  json runs = json::array();
  for (std::size_t i = 0; i < config.runs.size(); ++i) {
    const std::string rel = "traces/" + config.runs[i].label + ".csv";
    write_trace_csv(out_dir / rel, outcomes[i].result.trace);
    runs.push_back(report_entry(config.runs[i], outcomes[i], rel));
  }
  report["runs"] = std::move(runs);
  write_text_file(out_dir / "report.json", report.dump(2) + "\n");
  return report;
}

}  // namespace polyfree::harness
