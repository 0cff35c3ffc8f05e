#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hybridgrid/case_io.hpp"
#include "hybridgrid/cost.hpp"
#include "hybridgrid/dcopf.hpp"
#include "hybridgrid/harness.hpp"
#include "hybridgrid/json_canon.hpp"
#include "hybridgrid/preprocess.hpp"
#include "hybridgrid/transition.hpp"

namespace hg = hybridgrid;
namespace fs = std::filesystem;

namespace {

struct StageError {
  std::string stage;
  int exit_code;
  std::string message;
};

hg::ProfileMap load_profiles_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(hg::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw hg::ParseError(path + ": " + e.what());
  }
  const nlohmann::json& profs = j.is_object() && j.contains("profiles")
                                    ? j["profiles"]
                                    : j;
  if (!profs.is_object())
    throw hg::ParseError(path + ": expected a 'profiles' object");
  hg::ProfileMap map;
  for (auto it = profs.begin(); it != profs.end(); ++it) {
    if (!it.value().is_array())
      throw hg::ParseError(path + ": profile " + it.key() + " must be an array");
    map[it.key()] = it.value().get<std::vector<double>>();
  }
  return map;
}

hg::OpfSolution peak_opf(const hg::Network& net) {
  hg::OpfProblem prob;
  prob.net = net;
  return hg::solve(prob);
}

std::string removed_lines_csv(const hg::ReduceReport& report) {
  std::string csv = "id,length_km\n";
  for (const auto& line : report.removed) {
    csv += std::to_string(line.id);
    csv += ",";
    csv += hg::format_real(line.length_km);
    csv += "\n";
  }
  return csv;
}

std::vector<int> parse_weeks(const std::string& spec, const hg::Network& net,
                             const hg::ProfileMap& profiles) {
  if (spec != "auto") {
    std::vector<int> starts;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const std::size_t comma = spec.find(',', pos);
      const std::string tok =
          spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (tok.empty()) throw hg::ParseError("bad --weeks value: " + spec);
      starts.push_back(std::stoi(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    return starts;
  }
  // auto: the weeks of minimum and maximum system load over the covered span.
  std::size_t span = SIZE_MAX;
  bool any = false;
  for (const auto& bus : net.buses) {
    if (!bus.load_profile_id) continue;
    auto it = profiles.find(*bus.load_profile_id);
    if (it == profiles.end())
      throw hg::ValidationError("missing profile '" + *bus.load_profile_id + "'");
    span = std::min(span, it->second.size());
    any = true;
  }
  if (!any) return {0};  // constant loads: any window is representative
  if (span < 168)
    throw hg::ValidationError("profiles shorter than one week (168 hours)");
  const auto weeks =
      hg::find_extreme_weeks(net, profiles, static_cast<int>(span));
  if (weeks.min_week_start == weeks.max_week_start)
    return {weeks.min_week_start};
  std::vector<int> starts = {weeks.min_week_start, weeks.max_week_start};
  std::sort(starts.begin(), starts.end());
  return starts;
}

int run(int argc, char** argv) {
  CLI::App app{"hybridgrid: grid expansion planning with AC-to-HVDC conversion"};
  app.require_subcommand(1);

  // preprocess
  auto* cmd_pre = app.add_subcommand(
      "preprocess", "Reduce to the base grid and streamline the model");
  std::string pre_case, pre_out, pre_report;
  bool pre_skip_reduce = false, pre_auto_essential = false;
  cmd_pre->add_option("case", pre_case, "input case file")->required();
  cmd_pre->add_option("-o,--out", pre_out, "output case file")->required();
  cmd_pre->add_flag("--skip-reduce", pre_skip_reduce,
                    "keep all new lines (skip the base-grid reduction)");
  cmd_pre->add_flag("--auto-essential", pre_auto_essential,
                    "flag essential new lines by the bridge rule first");
  cmd_pre->add_option("--report", pre_report, "CSV of removed lines (id, km)");

  // opf
  auto* cmd_opf = app.add_subcommand("opf", "Solve one linearized OPF");
  std::string opf_case, opf_out, opf_profiles;
  int opf_hour = -1;
  cmd_opf->add_option("case", opf_case, "input case file")->required();
  cmd_opf->add_option("-o,--out", opf_out, "solution JSON")->required();
  cmd_opf->add_option("--hour", opf_hour, "apply profiles at this hour");
  cmd_opf->add_option("--profiles", opf_profiles, "extra profiles JSON");

  // plan
  auto* cmd_plan = app.add_subcommand(
      "plan", "Peak OPF, MST selection and conversion plan for a base grid");
  std::string plan_case, plan_catalog, plan_config, plan_out, plan_grid_out;
  cmd_plan->add_option("case", plan_case, "preprocessed case file")->required();
  cmd_plan->add_option("--catalog", plan_catalog, "converter catalog JSON")
      ->required();
  cmd_plan->add_option("--config", plan_config, "rating scheme config JSON");
  cmd_plan->add_option("-o,--out", plan_out, "plan JSON")->required();
  cmd_plan->add_option("--grid-out", plan_grid_out, "converted case file");

  // cost
  auto* cmd_cost = app.add_subcommand("cost", "Investment cost of a plan");
  std::string cost_plan, cost_case, cost_reference, cost_assumptions, cost_out;
  cmd_cost->add_option("plan", cost_plan, "plan JSON")->required();
  cmd_cost->add_option("case", cost_case, "case the plan applies to")->required();
  cmd_cost->add_option("--reference", cost_reference,
                       "reference case for the savings comparison");
  cmd_cost->add_option("--assumptions", cost_assumptions, "cost rates JSON");
  cmd_cost->add_option("-o,--out", cost_out, "report file (.json or .csv)")
      ->required();

  // evaluate
  auto* cmd_eval = app.add_subcommand(
      "evaluate", "Hourly OPF comparison of two grid variants");
  std::string eval_case_a, eval_case_b, eval_profiles, eval_weeks = "auto",
              eval_out;
  cmd_eval->add_option("caseA", eval_case_a, "first case file")->required();
  cmd_eval->add_option("caseB", eval_case_b, "second case file")->required();
  cmd_eval->add_option("--profiles", eval_profiles, "extra profiles JSON");
  cmd_eval->add_option("--weeks", eval_weeks,
                       "auto or comma-separated week start hours");
  cmd_eval->add_option("-o,--out", eval_out, "output directory")->required();

  // pipeline
  auto* cmd_pipe = app.add_subcommand(
      "pipeline", "preprocess -> peak OPF -> plan -> cost -> evaluate");
  std::string pipe_case, pipe_catalog, pipe_config, pipe_profiles,
      pipe_assumptions, pipe_weeks = "auto", pipe_out;
  cmd_pipe->add_option("case", pipe_case, "input case file")->required();
  cmd_pipe->add_option("--catalog", pipe_catalog, "converter catalog JSON")
      ->required();
  cmd_pipe->add_option("--config", pipe_config, "rating scheme config JSON");
  cmd_pipe->add_option("--profiles", pipe_profiles, "extra profiles JSON");
  cmd_pipe->add_option("--assumptions", pipe_assumptions, "cost rates JSON");
  cmd_pipe->add_option("--weeks", pipe_weeks,
                       "auto or comma-separated week start hours");
  cmd_pipe->add_option("-o,--out-dir", pipe_out, "artifact directory")
      ->required();

  // count-trees
  auto* cmd_count =
      app.add_subcommand("count-trees", "Spanning trees of the AC graph");
  std::string count_case;
  cmd_count->add_option("case", count_case, "input case file")->required();

  CLI11_PARSE(app, argc, argv);

  if (cmd_pre->parsed()) {
    hg::Network net = hg::load_case(pre_case);
    if (pre_auto_essential) net = hg::flag_essential_lines(net);
    hg::ReduceReport report;
    const hg::Network out = hg::preprocess(net, pre_skip_reduce, &report);
    hg::save_case(out, pre_out);
    if (!pre_report.empty()) hg::write_file(pre_report, removed_lines_csv(report));
    return 0;
  }

  if (cmd_opf->parsed()) {
    const hg::Network net = hg::load_case(opf_case);
    hg::OpfProblem prob;
    prob.net = net;
    if (opf_hour >= 0) {
      hg::ProfileMap profiles = net.profiles;
      if (!opf_profiles.empty())
        profiles = hg::merged_profiles(net, load_profiles_file(opf_profiles));
      const auto h = static_cast<std::size_t>(opf_hour);
      for (const auto& bus : net.buses) {
        if (!bus.load_profile_id) continue;
        auto it = profiles.find(*bus.load_profile_id);
        if (it == profiles.end() || it->second.size() <= h)
          throw hg::ValidationError("profile '" + *bus.load_profile_id +
                                    "' missing or shorter than hour");
        prob.load_scale[bus.id] = it->second[h];
      }
      for (const auto& gen : net.generators) {
        if (gen.kind != hg::GeneratorKind::res || !gen.res_profile_id) continue;
        auto it = profiles.find(*gen.res_profile_id);
        if (it == profiles.end() || it->second.size() <= h)
          throw hg::ValidationError("profile '" + *gen.res_profile_id +
                                    "' missing or shorter than hour");
        prob.res_availability[gen.id] = it->second[h];
      }
    }
    const hg::OpfSolution sol = hg::solve(prob);
    hg::write_file(opf_out, hg::dump_canonical(hg::solution_to_json(sol)));
    return 0;
  }

  if (cmd_plan->parsed()) {
    const hg::Network net = hg::load_case(plan_case);
    const auto catalog = hg::load_catalog(plan_catalog);
    const hg::RatingConfig cfg = plan_config.empty()
                                     ? hg::RatingConfig{}
                                     : hg::load_rating_config(plan_config);
    const hg::OpfSolution sol = peak_opf(net);
    if (sol.status != hg::OpfStatus::optimal)
      throw hg::SolverError("peak OPF infeasible: " + sol.infeasibility_hint);
    const hg::TransitionResult result =
        hg::build_transition(net, sol, catalog, cfg);
    hg::write_file(plan_out, hg::dump_canonical(hg::plan_to_json(result.plan)));
    if (!plan_grid_out.empty()) hg::save_case(result.converted, plan_grid_out);
    return 0;
  }

  if (cmd_cost->parsed()) {
    nlohmann::json pj;
    try {
      pj = nlohmann::json::parse(hg::read_file(cost_plan));
    } catch (const nlohmann::json::parse_error& e) {
      throw hg::ParseError(cost_plan + ": " + e.what());
    }
    const hg::TransitionPlan plan = hg::plan_from_json(pj);
    const hg::Network net = hg::load_case(cost_case);
    const hg::CostAssumptions assumptions =
        cost_assumptions.empty() ? hg::CostAssumptions{}
                                 : hg::load_assumptions(cost_assumptions);
    hg::CostReport report = hg::plan_cost(plan, net, assumptions);
    if (!cost_reference.empty()) {
      const hg::Network reference = hg::load_case(cost_reference);
      const hg::CostReport savings =
          hg::savings_vs_reference(net, reference, assumptions);
      report.has_comparison = true;
      report.comparison = savings.items;
      report.comparison_total_keur = savings.grand_total_keur;
    }
    const bool csv = cost_out.size() >= 4 &&
                     cost_out.compare(cost_out.size() - 4, 4, ".csv") == 0;
    hg::write_file(cost_out,
                   csv ? hg::cost_report_to_csv(report)
                       : hg::dump_canonical(hg::cost_report_to_json(report)));
    return 0;
  }

  if (cmd_eval->parsed()) {
    const hg::Network net_a = hg::load_case(eval_case_a);
    const hg::Network net_b = hg::load_case(eval_case_b);
    hg::ProfileMap extra;
    if (!eval_profiles.empty()) extra = load_profiles_file(eval_profiles);
    const hg::ProfileMap prof_a = hg::merged_profiles(net_a, extra);
    const hg::ProfileMap prof_b = hg::merged_profiles(net_b, extra);
    const std::vector<int> weeks = parse_weeks(eval_weeks, net_a, prof_a);

    auto stem = [](const std::string& path) {
      return fs::path(path).stem().string();
    };
    fs::create_directories(eval_out);
    std::vector<hg::ScenarioRun> runs_a, runs_b;
    for (int start : weeks) {
      runs_a.push_back(hg::run_week(net_a, prof_a, start, 168, stem(eval_case_a)));
      runs_b.push_back(hg::run_week(net_b, prof_b, start, 168, stem(eval_case_b)));
    }
    auto windows_json = [](const std::vector<hg::ScenarioRun>& runs) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& run : runs) arr.push_back(hg::run_to_json(run));
      return nlohmann::json{{"windows", arr}};
    };
    hg::write_file((fs::path(eval_out) / "run_a.json").string(),
                   hg::dump_canonical(windows_json(runs_a)));
    hg::write_file((fs::path(eval_out) / "run_b.json").string(),
                   hg::dump_canonical(windows_json(runs_b)));
    hg::write_file((fs::path(eval_out) / "compare.csv").string(),
                   hg::comparison_csv(runs_a, runs_b));
    return 0;
  }

  if (cmd_pipe->parsed()) {
    // Everything is computed first and written only at the end, so a failing
    // stage leaves no partial artifact tree behind.
    std::string stage = "load";
    try {
      const hg::Network input = hg::load_case(pipe_case);
      const auto catalog = hg::load_catalog(pipe_catalog);
      const hg::RatingConfig cfg = pipe_config.empty()
                                       ? hg::RatingConfig{}
                                       : hg::load_rating_config(pipe_config);
      const hg::CostAssumptions assumptions =
          pipe_assumptions.empty() ? hg::CostAssumptions{}
                                   : hg::load_assumptions(pipe_assumptions);
      hg::ProfileMap extra;
      if (!pipe_profiles.empty()) extra = load_profiles_file(pipe_profiles);

      stage = "preprocess";
      const hg::Network base = hg::preprocess(input);

      stage = "opf";
      const hg::OpfSolution peak = peak_opf(base);
      if (peak.status != hg::OpfStatus::optimal)
        throw hg::SolverError("peak OPF infeasible: " + peak.infeasibility_hint);

      stage = "plan";
      const hg::TransitionResult transition =
          hg::build_transition(base, peak, catalog, cfg);

      stage = "cost";
      const hg::CostReport report =
          hg::plan_cost(transition.plan, transition.converted, assumptions);

      stage = "evaluate";
      const hg::ProfileMap profiles = hg::merged_profiles(base, extra);
      const std::vector<int> weeks = parse_weeks(pipe_weeks, base, profiles);
      std::vector<hg::ScenarioRun> runs_base, runs_htg;
      for (int start : weeks) {
        runs_base.push_back(hg::run_week(base, profiles, start, 168, "base"));
        runs_htg.push_back(
            hg::run_week(transition.converted, profiles, start, 168, "htg"));
      }

      stage = "write";
      fs::create_directories(pipe_out);
      const fs::path dir(pipe_out);
      hg::save_case(base, (dir / "base_case.json").string());
      hg::write_file((dir / "opf_peak.json").string(),
                     hg::dump_canonical(hg::solution_to_json(peak)));
      hg::write_file((dir / "plan.json").string(),
                     hg::dump_canonical(hg::plan_to_json(transition.plan)));
      hg::save_case(transition.converted,
                    (dir / "converted_case.json").string());
      hg::write_file((dir / "cost_report.json").string(),
                     hg::dump_canonical(hg::cost_report_to_json(report)));
      hg::write_file((dir / "compare.csv").string(),
                     hg::comparison_csv(runs_base, runs_htg));
      return 0;
    } catch (const hg::SolverError& e) {
      throw StageError{stage, 2, e.what()};
    } catch (const std::runtime_error& e) {
      throw StageError{stage, 1, e.what()};
    }
  }

  if (cmd_count->parsed()) {
    const hg::Network net = hg::load_case(count_case);
    std::cout << hg::count_spanning_trees(net) << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage << "]: " << e.message << "\n";
    return e.exit_code;
  } catch (const hg::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
