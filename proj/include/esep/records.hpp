#pragma once

// JSON record form for every report the CLI can emit.  Field order is fixed
// by insertion (ordered_json), doubles use the library's shortest-round-trip
// encoding, and from_json restores an equal value, so identical runs emit
// byte-identical records and parse(emit(x)) == x.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "esep/bounds.hpp"
#include "esep/constraints.hpp"
#include "esep/oracle.hpp"
#include "esep/separation.hpp"

namespace esep {

using Record = nlohmann::ordered_json;

// --- separation ------------------------------------------------------------

inline void to_json(Record& j, const SeparationVerdict& v) {
  j = Record{{"separated", v.separated}};
  j["witness_path"] =
      v.witness_path ? Record(*v.witness_path) : Record(nullptr);
}

inline void from_json(const Record& j, SeparationVerdict& v) {
  v.separated = j.at("separated").get<bool>();
  v.witness_path.reset();
  if (j.contains("witness_path") && !j.at("witness_path").is_null())
    v.witness_path = j.at("witness_path").get<std::vector<std::string>>();
}

// --- constraints -----------------------------------------------------------

inline void to_json(Record& j, const TestablePair& p) {
  j = Record{{"x", p.x}, {"y", p.y}, {"d", p.d}};
}

inline void from_json(const Record& j, TestablePair& p) {
  j.at("x").get_to(p.x);
  j.at("y").get_to(p.y);
  j.at("d").get_to(p.d);
}

inline void to_json(Record& j, const EsepWitness& w) {
  j = Record{{"a", w.a},           {"b", w.b},
             {"c", w.c},           {"d", w.d},
             {"strong", w.strong}, {"equality", w.equality}};
}

inline void from_json(const Record& j, EsepWitness& w) {
  j.at("a").get_to(w.a);
  j.at("b").get_to(w.b);
  j.at("c").get_to(w.c);
  j.at("d").get_to(w.d);
  j.at("strong").get_to(w.strong);
  j.at("equality").get_to(w.equality);
}

inline void to_json(Record& j, const BlockVerdict& v) {
  j = Record{{"c", v.c}, {"margin", v.margin}, {"qa", v.qa}, {"qb", v.qb}};
}

inline void from_json(const Record& j, BlockVerdict& v) {
  v.c = j.at("c").get<Assignment>();
  j.at("margin").get_to(v.margin);
  j.at("qa").get_to(v.qa);
  j.at("qb").get_to(v.qb);
}

inline void to_json(Record& j, const CompatibilityResult& r) {
  j = Record{{"feasible", r.feasible}, {"margin", r.margin}};
  j["violating_c"] = r.violating_c ? Record(*r.violating_c) : Record(nullptr);
  j["blocks"] = r.blocks;
  j["skipped_c"] = r.skipped_c;
}

inline void from_json(const Record& j, CompatibilityResult& r) {
  j.at("feasible").get_to(r.feasible);
  j.at("margin").get_to(r.margin);
  r.violating_c.reset();
  if (!j.at("violating_c").is_null())
    r.violating_c = j.at("violating_c").get<Assignment>();
  r.blocks = j.at("blocks").get<std::vector<BlockVerdict>>();
  r.skipped_c = j.at("skipped_c").get<std::vector<Assignment>>();
}

inline void to_json(Record& j, const SliceCheck& s) {
  j = Record{{"witness", s.witness},
             {"d", s.d},
             {"form", s.form == SliceForm::Strong ? "strong" : "weak"},
             {"result", s.result}};
}

inline void from_json(const Record& j, SliceCheck& s) {
  j.at("witness").get_to(s.witness);
  s.d = j.at("d").get<Assignment>();
  s.form = j.at("form").get<std::string>() == "strong" ? SliceForm::Strong
                                                       : SliceForm::Weak;
  j.at("result").get_to(s.result);
}

inline void to_json(Record& j, const CheckReport& r) {
  j = Record{{"all_feasible", r.all_feasible},
             {"max_margin", r.max_margin},
             {"skipped_slices", r.skipped_slices},
             {"checks", r.checks}};
}

inline void from_json(const Record& j, CheckReport& r) {
  j.at("all_feasible").get_to(r.all_feasible);
  j.at("max_margin").get_to(r.max_margin);
  j.at("skipped_slices").get_to(r.skipped_slices);
  r.checks = j.at("checks").get<std::vector<SliceCheck>>();
}

// --- bounds ----------------------------------------------------------------

inline void to_json(Record& j, const VariantBounds& v) {
  j = Record{{"lower", v.lower}, {"upper", v.upper}};
}

inline void from_json(const Record& j, VariantBounds& v) {
  j.at("lower").get_to(v.lower);
  j.at("upper").get_to(v.upper);
}

inline void to_json(Record& j, const BoundsResult& r) {
  j = Record{{"lower", r.lower},
             {"upper", r.upper},
             {"variant_used", r.variant_used}};
  j["general"] = r.general ? Record(*r.general) : Record(nullptr);
  j["strengthened"] =
      r.strengthened ? Record(*r.strengthened) : Record(nullptr);
  j["strengthened_admissible"] = r.strengthened_admissible;
  j["inputs"] = r.inputs;
}

inline void from_json(const Record& j, BoundsResult& r) {
  j.at("lower").get_to(r.lower);
  j.at("upper").get_to(r.upper);
  j.at("variant_used").get_to(r.variant_used);
  r.general.reset();
  if (!j.at("general").is_null())
    r.general = j.at("general").get<VariantBounds>();
  r.strengthened.reset();
  if (!j.at("strengthened").is_null())
    r.strengthened = j.at("strengthened").get<VariantBounds>();
  j.at("strengthened_admissible").get_to(r.strengthened_admissible);
  r.inputs = j.at("inputs").get<std::map<std::string, double>>();
}

inline void to_json(Record& j, const AcdeResult& r) {
  j = Record{{"lower", r.lower},
             {"upper", r.upper},
             {"includes_zero", r.includes_zero},
             {"arm0", r.arm0},
             {"arm1", r.arm1}};
}

inline void from_json(const Record& j, AcdeResult& r) {
  j.at("lower").get_to(r.lower);
  j.at("upper").get_to(r.upper);
  j.at("includes_zero").get_to(r.includes_zero);
  j.at("arm0").get_to(r.arm0);
  j.at("arm1").get_to(r.arm1);
}

// --- sweeps ----------------------------------------------------------------

inline void to_json(Record& j, const SweepViolation& v) {
  j = Record{{"kind", v.kind},
             {"model_index", v.model_index},
             {"model_seed", v.model_seed},
             {"detail", v.detail}};
}

inline void from_json(const Record& j, SweepViolation& v) {
  j.at("kind").get_to(v.kind);
  j.at("model_index").get_to(v.model_index);
  j.at("model_seed").get_to(v.model_seed);
  j.at("detail").get_to(v.detail);
}

inline void to_json(Record& j, const SweepReport& r) {
  j = Record{{"n_models", r.n_models},
             {"compat_slices", r.compat_slices},
             {"bound_queries", r.bound_queries},
             {"skipped", r.skipped},
             {"max_compat_margin", r.max_compat_margin},
             {"max_containment_violation", r.max_containment_violation},
             {"max_dominance_violation", r.max_dominance_violation},
             {"violations", r.violations}};
}

inline void from_json(const Record& j, SweepReport& r) {
  j.at("n_models").get_to(r.n_models);
  j.at("compat_slices").get_to(r.compat_slices);
  j.at("bound_queries").get_to(r.bound_queries);
  j.at("skipped").get_to(r.skipped);
  j.at("max_compat_margin").get_to(r.max_compat_margin);
  j.at("max_containment_violation").get_to(r.max_containment_violation);
  j.at("max_dominance_violation").get_to(r.max_dominance_violation);
  r.violations = j.at("violations").get<std::vector<SweepViolation>>();
}

}  // namespace esep
