#pragma once

#include "json.hpp"

#include "pseudorot/diophantine/lstar.hpp"

namespace pseudorot {

using Json = nlohmann::ordered_json;

inline Json to_json(const ContinuedFraction& cf) {
  Json j;
  j["type"] = "continued_fraction";
  j["a0"] = to_string(cf.a0);
  Json q = Json::array();
  for (const auto& a : cf.quotients) q.push_back(to_string(a));
  j["quotients"] = q;
  if (cf.tail) {
    j["tail"] = {{"kind", "bounded"},
                 {"lower", to_string(cf.tail->lower)},
                 {"upper", cf.tail->upper ? Json(to_string(*cf.tail->upper)) : Json(nullptr)},
                 {"exp_lower", cf.tail->exp_lower ? Json(to_string(*cf.tail->exp_lower))
                                                  : Json(nullptr)}};
  } else {
    j["tail"] = {{"kind", "terminated"}};
  }
  return j;
}

inline ContinuedFraction continued_fraction_from_json(const Json& j) {
  if (!j.is_object() || j.value("type", "") != "continued_fraction")
    throw InvalidArgument("not a continued_fraction record");
  ContinuedFraction cf;
  cf.a0 = parse_integer(j.at("a0").get<std::string>());
  for (const auto& a : j.at("quotients")) cf.quotients.push_back(parse_integer(a.get<std::string>()));
  const Json& t = j.at("tail");
  const std::string kind = t.at("kind").get<std::string>();
  if (kind == "bounded") {
    TailBound tb;
    tb.lower = parse_rational(t.at("lower").get<std::string>());
    if (t.contains("upper") && !t.at("upper").is_null())
      tb.upper = parse_rational(t.at("upper").get<std::string>());
    if (t.contains("exp_lower") && !t.at("exp_lower").is_null())
      tb.exp_lower = parse_integer(t.at("exp_lower").get<std::string>());
    cf.tail = tb;
  } else if (kind != "terminated") {
    throw InvalidArgument("unknown tail kind: " + kind);
  }
  cf.validate();
  return cf;
}

inline Json to_json(const RationalInterval& r) {
  return {{"lower", to_string(r.lo)}, {"upper", to_string(r.hi)}};
}

inline RationalInterval interval_from_json(const Json& j) {
  return {parse_rational(j.at("lower").get<std::string>()),
          parse_rational(j.at("upper").get<std::string>())};
}

inline Json to_json(const WitnessResult& w) {
  Json j;
  j["type"] = "lstar_witness";
  j["status"] = to_string(w.status);
  j["searched_depth"] = w.searched_depth;
  j["explanation"] = w.explanation;
  if (w.witness) {
    j["k"] = w.witness->k;
    j["index"] = w.witness->index;
    j["p"] = to_string(w.witness->p);
    j["q"] = to_string(w.witness->q);
    j["gap"] = to_json(w.witness->certified_gap);
  }
  return j;
}

inline WitnessResult witness_from_json(const Json& j) {
  if (j.value("type", "") != "lstar_witness") throw InvalidArgument("not an lstar_witness record");
  WitnessResult w;
  const std::string st = j.at("status").get<std::string>();
  w.status = st == "certified" ? Certainty::certified
             : st == "refuted" ? Certainty::refuted
                               : Certainty::unknown;
  w.searched_depth = j.at("searched_depth").get<long>();
  w.explanation = j.at("explanation").get<std::string>();
  if (j.contains("p")) {
    w.witness = LStarWitness{j.at("k").get<long>(), parse_integer(j.at("p").get<std::string>()),
                             parse_integer(j.at("q").get<std::string>()),
                             j.at("index").get<long>(), interval_from_json(j.at("gap"))};
  }
  return w;
}

inline Json to_json(const RigiditySequence& s) {
  Json j;
  j["type"] = "rigidity_sequence";
  j["complete"] = s.complete;
  j["explanation"] = s.explanation;
  Json e = Json::array();
  for (const auto& r : s.entries) {
    e.push_back({{"j", r.j},
                 {"n", to_string(r.n)},
                 {"index", r.index},
                 {"frac", to_json(r.frac)},
                 {"small", to_json(r.small)},
                 {"complement", r.complement}});
  }
  j["entries"] = e;
  return j;
}

inline RigiditySequence rigidity_sequence_from_json(const Json& j) {
  if (j.value("type", "") != "rigidity_sequence")
    throw InvalidArgument("not a rigidity_sequence record");
  RigiditySequence s;
  s.complete = j.at("complete").get<bool>();
  s.explanation = j.at("explanation").get<std::string>();
  for (const auto& e : j.at("entries")) {
    s.entries.push_back({e.at("j").get<long>(), parse_integer(e.at("n").get<std::string>()),
                         e.at("index").get<long>(), interval_from_json(e.at("frac")),
                         interval_from_json(e.at("small")), e.at("complement").get<bool>()});
  }
  return s;
}

inline Json to_json(const FractionalPartEnclosure& f) {
  return {{"type", "fractional_part"},
          {"n", to_string(f.n)},
          {"lower", to_string(f.lower)},
          {"upper", to_string(f.upper)},
          {"exact", f.exact}};
}

inline Json to_json(const DiophantineEvidence& ev) {
  Json j;
  j["type"] = "diophantine_evidence";
  j["depth"] = ev.depth;
  j["label"] = ev.label;
  Json lv = Json::array();
  for (const auto& l : ev.levels) {
    Json e = {{"k", l.k}, {"present", l.present}};
    if (l.present) {
      e["index"] = l.index;
      e["q"] = to_string(l.q);
    }
    lv.push_back(e);
  }
  j["levels"] = lv;
  return j;
}

}  // namespace pseudorot
