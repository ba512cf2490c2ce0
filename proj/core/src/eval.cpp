#include "pubrank/eval.hpp"

#include <unordered_map>

#include <json.hpp>

#include "pubrank/errors.hpp"
#include "pubrank/metrics.hpp"

namespace pubrank::eval {

namespace {

using ojson = nlohmann::ordered_json;

ojson rouge_json(const metrics::RougeScore& s) {
  return ojson{{"recall", s.recall}, {"precision", s.precision}, {"f1", s.f1}};
}

std::unordered_map<std::string, const Question*> index_by_id(const std::vector<Question>& gold) {
  std::unordered_map<std::string, const Question*> out;
  for (const auto& q : gold) out.emplace(q.id, &q);
  return out;
}

}  // namespace

PhaseAReport evaluate_phase_a(const std::vector<RankedRun>& runs, const std::vector<Question>& gold,
                              const std::vector<std::size_t>& recall_depths) {
  auto by_id = index_by_id(gold);
  PhaseAReport report;
  report.recall_depths = recall_depths;

  std::vector<std::string> unknown;
  for (const auto& run : runs) {
    if (by_id.count(run.question_id) == 0) unknown.push_back(run.question_id);
  }
  if (!unknown.empty()) {
    std::string msg = "run file has questions missing from gold:";
    for (const auto& id : unknown) msg += " " + id;
    throw UsageError(msg);
  }

  std::vector<double> aps;
  std::vector<std::vector<double>> recalls(recall_depths.size());
  for (const auto& run : runs) {
    const auto& q = *by_id.at(run.question_id);
    if (q.gold_documents.empty()) {
      report.warnings.push_back("question " + q.id + " has no gold documents; excluded");
      continue;
    }
    auto gs = q.gold_set();
    PhaseAQuestion pq;
    pq.question_id = q.id;
    pq.gold_count = gs.relevant.size();
    pq.ap10 = metrics::average_precision_at10(run, gs);
    aps.push_back(pq.ap10);
    for (std::size_t i = 0; i < recall_depths.size(); ++i) {
      pq.recall.push_back(metrics::recall_at_n(run, gs, recall_depths[i]));
      recalls[i].push_back(pq.recall.back());
    }
    report.questions.push_back(std::move(pq));
  }
  report.evaluated = aps.size();
  report.map10 = metrics::stable_mean(aps);
  for (const auto& r : recalls) report.mean_recall.push_back(metrics::stable_mean(r));
  return report;
}

std::string PhaseAReport::to_json() const {
  ojson j;
  j["phase"] = "A";
  j["evaluated"] = evaluated;
  j["map@10"] = map10;
  ojson recall = ojson::object();
  for (std::size_t i = 0; i < recall_depths.size(); ++i) {
    recall["recall@" + std::to_string(recall_depths[i])] = mean_recall[i];
  }
  j["recall"] = std::move(recall);
  ojson per = ojson::array();
  for (const auto& q : questions) {
    ojson e;
    e["question_id"] = q.question_id;
    e["gold_count"] = q.gold_count;
    e["ap@10"] = q.ap10;
    for (std::size_t i = 0; i < recall_depths.size(); ++i) e["recall@" + std::to_string(recall_depths[i])] = q.recall[i];
    per.push_back(std::move(e));
  }
  j["questions"] = std::move(per);
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

PhaseBReport evaluate_phase_b(const std::vector<prompts::AnswerRecord>& answers, const std::vector<Question>& gold) {
  auto by_id = index_by_id(gold);
  PhaseBReport report;

  std::vector<std::optional<metrics::YesNo>> yn_pred;
  std::vector<metrics::YesNo> yn_gold;
  std::vector<double> rr, lp, lr, lf;
  std::vector<double> r2r, r2p, r2f, sur, sup, suf;

  for (const auto& a : answers) {
    auto it = by_id.find(a.id);
    if (it == by_id.end()) throw UsageError("answers mention unknown question id " + a.id);
    const auto& q = *it->second;
    PhaseBQuestion pq;
    pq.question_id = q.id;
    pq.type = q.type;
    if (a.exact && q.type != QuestionType::summary && prompts::type_of(*a.exact) != q.type) {
      throw DataError("question " + q.id + ": exact answer shape does not match its type");
    }
    pq.has_exact = a.exact.has_value();

    switch (q.type) {
      case QuestionType::yesno:
        if (!q.yes) {
          report.warnings.push_back("question " + q.id + " has no gold yes/no answer; exact answer not scored");
          break;
        }
        yn_gold.push_back(*q.yes ? metrics::YesNo::yes : metrics::YesNo::no);
        if (a.exact) {
          bool yes = std::get<prompts::YesNoAnswer>(*a.exact).yes;
          yn_pred.emplace_back(yes ? metrics::YesNo::yes : metrics::YesNo::no);
          pq.yesno_predicted = yes ? "yes" : "no";
        } else {
          yn_pred.emplace_back(std::nullopt);
        }
        break;
      case QuestionType::factoid: {
        if (q.answer_groups.empty()) {
          report.warnings.push_back("question " + q.id + " has no gold factoid answer; exact answer not scored");
          break;
        }
        std::vector<std::string> pred;
        if (a.exact) pred = std::get<prompts::FactoidAnswer>(*a.exact).entities;
        pq.exact_score = metrics::reciprocal_rank(pred, q.factoid_gold());
        rr.push_back(pq.exact_score);
        break;
      }
      case QuestionType::list: {
        if (q.answer_groups.empty()) {
          report.warnings.push_back("question " + q.id + " has no gold list answer; exact answer not scored");
          break;
        }
        std::vector<std::string> pred;
        if (a.exact) pred = std::get<prompts::ListAnswer>(*a.exact).items;
        auto prf = metrics::list_f1(pred, q.factoid_gold());
        pq.exact_score = prf.f1;
        pq.list_precision = prf.precision;
        pq.list_recall = prf.recall;
        lp.push_back(prf.precision);
        lr.push_back(prf.recall);
        lf.push_back(prf.f1);
        break;
      }
      case QuestionType::summary:
        break;
    }

    if (!q.ideal_answer.empty()) {
      pq.has_ideal = a.ideal.has_value();
      std::string candidate = a.ideal.value_or("");
      pq.rouge2 = metrics::rouge_2(candidate, q.ideal_answer);
      pq.rouge_su4 = metrics::rouge_su4(candidate, q.ideal_answer);
      r2r.push_back(pq.rouge2.recall);
      r2p.push_back(pq.rouge2.precision);
      r2f.push_back(pq.rouge2.f1);
      sur.push_back(pq.rouge_su4.recall);
      sup.push_back(pq.rouge_su4.precision);
      suf.push_back(pq.rouge_su4.f1);
    }
    report.questions.push_back(std::move(pq));
  }

  report.yesno_count = yn_gold.size();
  if (!yn_gold.empty()) report.yesno = metrics::macro_f1_yesno(yn_pred, yn_gold);
  report.factoid_count = rr.size();
  report.mrr = metrics::stable_mean(rr);
  report.list_count = lf.size();
  report.list_precision = metrics::stable_mean(lp);
  report.list_recall = metrics::stable_mean(lr);
  report.list_f1 = metrics::stable_mean(lf);
  report.ideal_count = r2f.size();
  report.rouge2 = {metrics::stable_mean(r2r), metrics::stable_mean(r2p), metrics::stable_mean(r2f)};
  report.rouge_su4 = {metrics::stable_mean(sur), metrics::stable_mean(sup), metrics::stable_mean(suf)};
  return report;
}

std::string PhaseBReport::to_json() const {
  ojson j;
  j["phase"] = "B";
  j["yesno"] = ojson{{"count", yesno_count}, {"maF1", yesno.macro_f1}, {"f1_yes", yesno.f1_yes},
                     {"f1_no", yesno.f1_no}};
  j["factoid"] = ojson{{"count", factoid_count}, {"mrr", mrr}};
  j["list"] = ojson{{"count", list_count}, {"mean_precision", list_precision}, {"mean_recall", list_recall},
                    {"mean_f1", list_f1}};
  j["ideal"] = ojson{{"count", ideal_count}, {"rouge_2", rouge_json(rouge2)}, {"rouge_su4", rouge_json(rouge_su4)}};
  ojson per = ojson::array();
  for (const auto& q : questions) {
    ojson e;
    e["question_id"] = q.question_id;
    e["type"] = std::string(to_string(q.type));
    e["has_exact"] = q.has_exact;
    switch (q.type) {
      case QuestionType::yesno: e["predicted"] = q.yesno_predicted; break;
      case QuestionType::factoid: e["rr"] = q.exact_score; break;
      case QuestionType::list:
        e["precision"] = q.list_precision;
        e["recall"] = q.list_recall;
        e["f1"] = q.exact_score;
        break;
      case QuestionType::summary: break;
    }
    e["has_ideal"] = q.has_ideal;
    e["rouge_2"] = rouge_json(q.rouge2);
    e["rouge_su4"] = rouge_json(q.rouge_su4);
    per.push_back(std::move(e));
  }
  j["questions"] = std::move(per);
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

}  // namespace pubrank::eval
