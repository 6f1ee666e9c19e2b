#pragma once

// Run directory layout and the reports rendered from it.
//
//   iter_<t>/assignments.csv   id,label for iteration t
//   iter_<t>/topics.json       c-TF-IDF terms per label
//   indices.json               comparison indices between successive iterations
//   summary.json               per-iteration topic and outlier counts
//   final/assignments.csv      assembled grouping over the whole corpus
//   final/topics.json

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "itopic/error.hpp"
#include "itopic/io.hpp"
#include "itopic/iterate.hpp"
#include "itopic/partition.hpp"
#include "itopic/topicrep.hpp"

namespace itopic::rundir {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline constexpr std::size_t kReportTerms = 10;

inline ordered_json summary_json(const RunResult& result, const RunConfig& cfg) {
  ordered_json j;
  j["stop_reason"] = std::string(to_string(result.stop_reason));
  j["detail"] = result.detail;
  j["stop_metric"] = std::string(to_string(cfg.stop_metric));
  j["stop_on_delta"] = cfg.stop_on_delta;
  j["epsilon"] = io::sig6(cfg.epsilon);
  j["step_k"] = cfg.step_k;
  j["documents"] = result.final.size();
  j["final_groups"] = result.final.group_count();
  auto rows = ordered_json::array();
  for (const auto& rec : result.records) {
    ordered_json row;
    row["iter"] = rec.t;
    row["requested_n"] = rec.requested_n ? ordered_json(*rec.requested_n) : ordered_json(nullptr);
    row["achieved_topics"] = rec.achieved_topics;
    row["achieved_groups"] = rec.partition.group_count();
    row["outlier_count"] = rec.outlier_ids.size();
    rows.push_back(std::move(row));
  }
  j["iterations"] = std::move(rows);
  return j;
}

inline ordered_json indices_json(const RunResult& result) {
  auto arr = ordered_json::array();
  for (std::size_t i = 1; i < result.records.size(); ++i) {
    const auto& rec = result.records[i];
    if (!rec.vs_previous) continue;
    const auto& r = *rec.vs_previous;
    ordered_json row;
    row["from_iter"] = result.records[i - 1].t;
    row["to_iter"] = rec.t;
    row["n_common"] = r.n_common;
    row["rand"] = io::sig6(r.rand);
    row["ari"] = io::sig6(r.ari);
    row["vdm"] = io::sig6(r.vdm);
    row["vi_nats"] = io::sig6(r.vi);
    row["nvi"] = io::sig6(r.nvi);
    arr.push_back(std::move(row));
  }
  return arr;
}

/// Writes the run directory, replacing entries from any earlier run in `outdir`.
inline void write(const RunResult& result, const RunConfig& cfg, const fs::path& outdir) {
  fs::create_directories(outdir);
  for (const auto& entry : fs::directory_iterator(outdir)) {
    const auto name = entry.path().filename().string();
    if ((entry.is_directory() && (name.starts_with("iter_") || name == "final")) || name == "indices.json" ||
        name == "summary.json")
      fs::remove_all(entry.path());
  }
  for (const auto& rec : result.records) {
    const fs::path dir = outdir / ("iter_" + std::to_string(rec.t));
    io::write_file_atomic(dir / "assignments.csv", partition_csv(rec.partition));
    io::write_file_atomic(dir / "topics.json", io::dump_json(topics::topics_json(rec.reps, kReportTerms)));
  }
  io::write_file_atomic(outdir / "final" / "assignments.csv", partition_csv(result.final));
  io::write_file_atomic(outdir / "final" / "topics.json", io::dump_json(topics::topics_json(result.final_topics, kReportTerms)));
  io::write_file_atomic(outdir / "indices.json", io::dump_json(indices_json(result)));
  // summary last: its presence marks a complete directory
  io::write_file_atomic(outdir / "summary.json", io::dump_json(summary_json(result, cfg)));
}

struct RunFiles {
  ordered_json summary;
  ordered_json indices;
  ordered_json final_topics;
};

inline RunFiles load(const fs::path& dir) {
  auto read = [&](const fs::path& rel) {
    const auto path = dir / rel;
    if (!fs::exists(path)) throw Error(ErrorKind::Io, "missing " + path.string());
    try {
      return ordered_json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
  };
  return {read("summary.json"), read("indices.json"), read(fs::path("final") / "topics.json")};
}

inline std::string format_number(const ordered_json& v, int precision = 4) {
  if (v.is_null()) return "-";
  if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<long long>());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v.get<double>());
  return buf;
}

inline std::string markdown_report(const RunFiles& run) {
  std::string md = "# Iterative topic run\n\n";
  const auto reason = run.summary.value("stop_reason", std::string("unknown"));
  md += "Stop reason: **" + reason + "**";
  if (auto d = run.summary.value("detail", std::string()); !d.empty()) md += " (" + d + ")";
  md += "\n\n";
  if (reason != "Converged")
    md += "> Partial result: the run did not converge; the final grouping is assembled from the iterations that "
          "completed.\n\n";

  md += "## Iterations\n\n| Iteration | Requested | Topics | Groups | Size of topic -1 |\n|---|---|---|---|---|\n";
  for (const auto& row : run.summary.at("iterations")) {
    md += "| " + format_number(row.at("iter")) + " | " + format_number(row.at("requested_n")) + " | " +
          format_number(row.at("achieved_topics")) + " | " + format_number(row.at("achieved_groups")) + " | " +
          format_number(row.at("outlier_count")) + " |\n";
  }

  md += "\n## Successive comparisons\n\n| Iteration | Common | Adjusted Rand | Van Dongen | NVI |\n|---|---|---|---|---|\n";
  for (const auto& row : run.indices) {
    md += "| " + format_number(row.at("from_iter")) + " vs " + format_number(row.at("to_iter")) + " | " +
          format_number(row.at("n_common")) + " | " + format_number(row.at("ari")) + " | " +
          format_number(row.at("vdm")) + " | " + format_number(row.at("nvi")) + " |\n";
  }

  md += "\n## Final topics\n\n";
  for (const auto& topic : run.final_topics) {
    md += "- **" + std::to_string(topic.at("label").get<int>()) + "**";
    if (topic.contains("name")) md += " `" + topic.at("name").get<std::string>() + "`";
    md += " (" + std::to_string(topic.at("size").get<std::size_t>()) + " docs): ";
    std::string terms;
    for (const auto& tw : topic.at("terms")) {
      if (!terms.empty()) terms += ", ";
      terms += tw.at("term").get<std::string>();
    }
    md += (terms.empty() ? std::string("(no terms)") : terms) + "\n";
  }
  return md;
}

inline ordered_json json_report(const RunFiles& run) {
  ordered_json j;
  j["summary"] = run.summary;
  j["indices"] = run.indices;
  j["final_topics"] = run.final_topics;
  return j;
}

}  // namespace itopic::rundir
