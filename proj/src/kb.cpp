#include "idtw/kb.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "idtw/error.hpp"

namespace idtw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        parts.push_back(trim(s.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

std::string format_double(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string concept_key(std::string_view name, std::string_view population) {
    std::string key(name);
    if (!population.empty()) key.append("@").append(population);
    return key;
}

// Line-level parser state. Columns are 1-based offsets into the raw line.
struct Cursor {
    std::size_t line = 0;
    std::string_view raw;

    std::size_t column_of(std::string_view part) const {
        return static_cast<std::size_t>(part.data() - raw.data()) + 1;
    }
    [[noreturn]] void fail(const std::string& what, std::string_view at) const {
        throw ParseError(what, line, column_of(at));
    }
};

double parse_bound(const Cursor& cur, std::string_view s) {
    std::string l = lower(s);
    if (l == "inf" || l == "+inf") return kInf;
    if (l == "-inf") return -kInf;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        cur.fail("expected a number, 'inf' or '-inf', got '" + std::string(s) + "'", s);
    return v;
}

struct PendingConcept {
    ConceptDef def;
    std::size_t line = 0;
    bool has_type = false, has_variation = false, has_gb = false, has_ga = false;
};

void finish(PendingConcept& p, std::vector<ConceptDef>& out) {
    auto missing = [&](const char* key) {
        throw ParseError("concept '" + p.def.name + "' is missing required key '" + key + "'", p.line);
    };
    if (!p.has_type) missing("type");
    if (p.def.states.empty()) missing("state");
    if (!p.has_variation) missing("variation");
    if (!p.has_gb) missing("good_before");
    if (!p.has_ga) missing("good_after");
    for (std::size_t i = 0; i < p.def.states.size(); ++i)
        p.def.states[i].ordinal_index = static_cast<int>(i) + 1;
    out.push_back(std::move(p.def));
}

}  // namespace

std::string_view to_string(ValueType v) {
    switch (v) {
        case ValueType::numeric: return "numeric";
        case ValueType::ordinal_symbolic: return "ordinal";
        case ValueType::boolean: return "boolean";
    }
    return "?";
}

std::string_view to_string(ValueDelegate v) {
    switch (v) {
        case ValueDelegate::mean: return "mean";
        case ValueDelegate::median: return "median";
        case ValueDelegate::mode: return "mode";
    }
    return "?";
}

std::string_view to_string(DurationDelegate v) {
    return v == DurationDelegate::mtt ? "MTT" : "LI";
}

ValueType parse_value_type(std::string_view s) {
    std::string l = lower(trim(s));
    if (l == "numeric") return ValueType::numeric;
    if (l == "ordinal" || l == "ordinal-symbolic" || l == "ordinal_symbolic") return ValueType::ordinal_symbolic;
    if (l == "boolean" || l == "bool") return ValueType::boolean;
    throw KbError("unknown value_type '" + std::string(s) + "'");
}

ValueDelegate parse_value_delegate(std::string_view s) {
    std::string l = lower(trim(s));
    if (l == "mean") return ValueDelegate::mean;
    if (l == "median") return ValueDelegate::median;
    if (l == "mode") return ValueDelegate::mode;
    throw KbError("unknown value delegate '" + std::string(s) + "'");
}

DurationDelegate parse_duration_delegate(std::string_view s) {
    std::string l = lower(trim(s));
    if (l == "mtt") return DurationDelegate::mtt;
    if (l == "li") return DurationDelegate::li;
    throw KbError("unknown duration delegate '" + std::string(s) + "'");
}

double VariationSpec::threshold_from(double earlier) const {
    return kind == Kind::absolute ? threshold : threshold / 100.0 * std::abs(earlier);
}

KnowledgeBase::KnowledgeBase(std::vector<ConceptDef> concepts, Minutes base_unit)
    : concepts_(std::move(concepts)), base_unit_(base_unit) {
    if (concepts_.empty()) throw KbError("no concepts");
    if (base_unit_ <= 0) throw KbError("base unit must be positive");
    std::set<std::string> keys;
    for (const auto& c : concepts_) {
        validate(c);
        if (!keys.insert(concept_key(c.name, c.population)).second)
            throw KbError("duplicate concept '" + concept_key(c.name, c.population) + "'");
        if (c.good_before % base_unit_ != 0 || c.good_after % base_unit_ != 0)
            throw KbError("concept '" + c.name + "': persistence is not a whole number of base units");
    }
}

const ConceptDef* KnowledgeBase::find(std::string_view name, std::string_view population) const {
    const ConceptDef* fallback = nullptr;
    for (const auto& c : concepts_) {
        if (c.name != name) continue;
        if (c.population == population) return &c;
        if (c.population.empty()) fallback = &c;
    }
    return fallback;
}

const ConceptDef& KnowledgeBase::concept_for(std::string_view name, std::string_view population) const {
    if (const ConceptDef* c = find(name, population)) return *c;
    throw KbError("unknown concept '" + concept_key(name, population) + "'");
}

bool KnowledgeBase::contains(std::string_view name) const {
    return std::any_of(concepts_.begin(), concepts_.end(), [&](const auto& c) { return c.name == name; });
}

std::vector<std::string> KnowledgeBase::concept_names() const {
    std::vector<std::string> names;
    for (const auto& c : concepts_)
        if (std::find(names.begin(), names.end(), c.name) == names.end()) names.push_back(c.name);
    return names;
}

void validate(const ConceptDef& c) {
    const std::string who = "concept '" + concept_key(c.name, c.population) + "'";
    if (c.name.empty()) throw KbError("concept with empty name");
    if (c.states.empty()) throw KbError(who + ": no states");
    if (c.value_type == ValueType::ordinal_symbolic && c.states.size() < 2)
        throw KbError(who + ": ordinal concepts need at least 2 states");
    if (c.value_type == ValueType::boolean && c.states.size() != 2)
        throw KbError(who + ": boolean concepts need exactly 2 states");
    if (!(c.significant_variation.threshold > 0.0) || !std::isfinite(c.significant_variation.threshold))
        throw KbError(who + ": significant variation threshold must be positive");
    if (c.good_before < 0 || c.good_after < 0) throw KbError(who + ": negative persistence");
    for (std::size_t i = 0; i < c.states.size(); ++i) {
        const auto& s = c.states[i];
        if (!(s.low < s.high)) throw KbError(who + ": state '" + s.label + "' has low >= high");
        if (s.ordinal_index != static_cast<int>(i) + 1)
            throw KbError(who + ": state '" + s.label + "' has a wrong ordinal index");
        if (i > 0) {
            const auto& prev = c.states[i - 1];
            if (prev.high > s.low) throw KbError(who + ": states '" + prev.label + "' and '" + s.label + "' overlap");
            if (prev.high < s.low)
                throw KbError(who + ": gap between states '" + prev.label + "' and '" + s.label + "'");
        }
    }
}

const StateDef& state_for_value(const ConceptDef& c, double value) {
    if (!std::isfinite(value)) throw KbError("concept '" + c.name + "': non-finite value");
    if (value < c.states.front().low)
        throw OutOfRangeError("concept '" + c.name + "': value " + format_double(value) +
                              " is below the lowest state bound " + format_double(c.states.front().low));
    // First state whose upper bound exceeds the value; the last state absorbs the rest.
    auto it = std::upper_bound(c.states.begin(), c.states.end() - 1, value,
                               [](double v, const StateDef& s) { return v < s.high; });
    return *it;
}

KnowledgeBase parse_knowledge_base(std::istream& in) {
    std::vector<ConceptDef> concepts;
    std::optional<PendingConcept> current;
    Minutes base_unit = 1;
    std::string line;
    Cursor cur;

    while (std::getline(in, line)) {
        ++cur.line;
        cur.raw = line;
        std::string_view body = cur.raw;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;

        if (body.front() == '[') {
            if (body.back() != ']') cur.fail("unterminated section header", body);
            std::string_view inner = trim(body.substr(1, body.size() - 2));
            if (inner.substr(0, 8) != "concept " && inner.substr(0, 8) != "concept\t")
                cur.fail("expected '[concept <name>]'", inner);
            std::string_view name = trim(inner.substr(8));
            if (name.empty()) cur.fail("concept name is empty", inner);
            if (current) finish(*current, concepts);
            current.emplace();
            current->def.name = std::string(name);
            current->line = cur.line;
            continue;
        }

        auto eq = body.find('=');
        if (eq == std::string_view::npos) cur.fail("expected 'key=value'", body);
        std::string key = lower(trim(body.substr(0, eq)));
        std::string_view value = trim(body.substr(eq + 1));
        std::string_view key_at = body;
        if (value.empty()) cur.fail("empty value for key '" + key + "'", body.substr(eq));

        auto rethrow_at = [&](auto&& fn) {
            try {
                fn();
            } catch (const ParseError&) {
                throw;
            } catch (const KbError& e) {
                throw KbError("line " + std::to_string(cur.line) + ": " + e.what());
            } catch (const Error& e) {
                cur.fail(e.what(), value);
            }
        };

        if (!current) {
            if (key == "base_unit") {
                rethrow_at([&] {
                    base_unit = value.find(' ') == std::string_view::npos ? parse_granularity(value).length
                                                                           : parse_duration(value);
                });
                continue;
            }
            cur.fail("key '" + key + "' outside of a [concept] section", key_at);
        }
        ConceptDef& def = current->def;

        if (key == "type") {
            rethrow_at([&] { def.value_type = parse_value_type(value); });
            current->has_type = true;
        } else if (key == "state") {
            auto parts = split(value, ',');
            if (parts.size() != 3) cur.fail("state needs '<label>,<low>,<high>'", value);
            if (parts[0].empty()) cur.fail("state label is empty", value);
            StateDef s;
            s.label = std::string(parts[0]);
            s.low = parse_bound(cur, parts[1]);
            s.high = parse_bound(cur, parts[2]);
            def.states.push_back(std::move(s));
        } else if (key == "variation") {
            auto parts = split(value, ',');
            if (parts.size() != 2) cur.fail("variation needs '<absolute|percent>,<threshold>'", value);
            std::string kind = lower(parts[0]);
            if (kind == "absolute")
                def.significant_variation.kind = VariationSpec::Kind::absolute;
            else if (kind == "percent")
                def.significant_variation.kind = VariationSpec::Kind::percent;
            else
                cur.fail("variation kind must be 'absolute' or 'percent'", parts[0]);
            def.significant_variation.threshold = parse_bound(cur, parts[1]);
            current->has_variation = true;
        } else if (key == "good_before" || key == "good_after") {
            Minutes m = 0;
            rethrow_at([&] { m = parse_duration(value); });
            (key == "good_before" ? def.good_before : def.good_after) = m;
            (key == "good_before" ? current->has_gb : current->has_ga) = true;
        } else if (key == "value_delegate") {
            rethrow_at([&] { def.default_value_delegate = parse_value_delegate(value); });
        } else if (key == "duration_delegate") {
            rethrow_at([&] { def.default_duration_delegate = parse_duration_delegate(value); });
        } else if (key == "population") {
            def.population = std::string(value);
        } else {
            cur.fail("unknown key '" + key + "'", key_at);
        }
    }
    if (current) finish(*current, concepts);
    return KnowledgeBase(std::move(concepts), base_unit);
}

KnowledgeBase parse_knowledge_base(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_knowledge_base(in);
}

KnowledgeBase load_knowledge_base(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open knowledge base '" + path + "'");
    return parse_knowledge_base(in);
}

std::string serialize_knowledge_base(const KnowledgeBase& kb) {
    std::ostringstream out;
    if (kb.base_unit() != 1) out << "base_unit=" << format_duration(kb.base_unit()) << "\n\n";
    for (const auto& c : kb.concepts()) {
        out << "[concept " << c.name << "]\n";
        if (!c.population.empty()) out << "population=" << c.population << '\n';
        out << "type=" << to_string(c.value_type) << '\n';
        for (const auto& s : c.states)
            out << "state=" << s.label << ',' << format_double(s.low) << ',' << format_double(s.high) << '\n';
        out << "variation="
            << (c.significant_variation.kind == VariationSpec::Kind::absolute ? "absolute" : "percent") << ','
            << format_double(c.significant_variation.threshold) << '\n';
        out << "good_before=" << format_duration(c.good_before) << '\n';
        out << "good_after=" << format_duration(c.good_after) << '\n';
        out << "value_delegate=" << to_string(c.default_value_delegate) << '\n';
        out << "duration_delegate=" << to_string(c.default_duration_delegate) << "\n\n";
    }
    return out.str();
}

}  // namespace idtw
