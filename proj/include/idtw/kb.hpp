#pragma once

// Declarative per-concept abstraction knowledge: state ranges, significant
// variation, Good-Before/Good-After persistence and delegate defaults.

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idtw/temporal.hpp"

namespace idtw {

enum class ValueType { numeric, ordinal_symbolic, boolean };
enum class ValueDelegate { mean, median, mode };
enum class DurationDelegate { mtt, li };

std::string_view to_string(ValueType v);
std::string_view to_string(ValueDelegate v);
std::string_view to_string(DurationDelegate v);
ValueType parse_value_type(std::string_view s);
ValueDelegate parse_value_delegate(std::string_view s);
DurationDelegate parse_duration_delegate(std::string_view s);

// Half-open range [low, high); the topmost state of a concept is closed above at +inf.
struct StateDef {
    std::string label;
    double low = 0.0;
    double high = 0.0;
    int ordinal_index = 1;

    bool operator==(const StateDef&) const = default;
};

struct VariationSpec {
    enum class Kind { absolute, percent };
    Kind kind = Kind::absolute;
    double threshold = 0.0;

    // Threshold a change from `earlier` must reach to count as significant.
    double threshold_from(double earlier) const;

    bool operator==(const VariationSpec&) const = default;
};

struct ConceptDef {
    std::string name;
    // Empty for concepts that apply to every entity; otherwise the value of the
    // entity attribute that selects this definition (e.g. "FEMALE").
    std::string population;
    ValueType value_type = ValueType::numeric;
    std::vector<StateDef> states;  // low -> high
    VariationSpec significant_variation;
    Minutes good_before = 0;
    Minutes good_after = 0;
    ValueDelegate default_value_delegate = ValueDelegate::mean;
    DurationDelegate default_duration_delegate = DurationDelegate::mtt;

    Minutes half_life() const { return good_before > good_after ? good_before : good_after; }

    bool operator==(const ConceptDef&) const = default;
};

class KnowledgeBase {
public:
    KnowledgeBase() = default;
    explicit KnowledgeBase(std::vector<ConceptDef> concepts, Minutes base_unit = 1);

    // Exact (name, population) entry, falling back to the population-less entry.
    const ConceptDef& concept_for(std::string_view name, std::string_view population = {}) const;
    const ConceptDef* find(std::string_view name, std::string_view population = {}) const;
    bool contains(std::string_view name) const;

    // Distinct concept names in file order.
    std::vector<std::string> concept_names() const;
    const std::vector<ConceptDef>& concepts() const { return concepts_; }
    Minutes base_unit() const { return base_unit_; }

    bool operator==(const KnowledgeBase&) const = default;

private:
    std::vector<ConceptDef> concepts_;
    Minutes base_unit_ = 1;
};

// Throws ParseError (with line/column) on syntax errors, KbError on semantic violations.
KnowledgeBase parse_knowledge_base(std::istream& in);
KnowledgeBase parse_knowledge_base(std::string_view text);
KnowledgeBase load_knowledge_base(const std::string& path);

std::string serialize_knowledge_base(const KnowledgeBase& kb);

// Checks every ConceptDef invariant; throws KbError.
void validate(const ConceptDef& concept_def);

// The unique state whose range holds `value`. Throws OutOfRangeError below the
// lowest finite bound and KbError for non-finite values.
const StateDef& state_for_value(const ConceptDef& concept_def, double value);

}  // namespace idtw
