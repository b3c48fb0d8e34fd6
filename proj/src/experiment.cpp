#include "idtw/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "idtw/error.hpp"
#include "idtw/eval.hpp"

namespace idtw {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        auto part = trim(s.substr(pos, next - pos));
        if (!part.empty()) parts.push_back(part);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

int parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError("expected an integer, got '" + std::string(s) + "'");
    return v;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string timestamp_text(Timestamp t) { return std::to_string(t); }

}  // namespace

bool MatchConfig::all_raw() const {
    return !concepts.empty() && std::all_of(concepts.begin(), concepts.end(), [](const auto& c) {
        return c.representation == Representation::raw;
    });
}

std::vector<Feature> MatchConfig::features() const {
    std::vector<Feature> out;
    for (const auto& c : concepts)
        for (auto& f : expand_features(c.concept_name, c.representation)) out.push_back(std::move(f));
    return out;
}

std::string MatchConfig::concepts_key() const {
    std::vector<std::string> parts;
    for (const auto& c : concepts) parts.push_back(c.concept_name + ":" + std::string(code(c.representation)));
    return join(parts, ";");
}

std::string MatchConfig::representation_key() const {
    std::vector<Representation> reps;
    for (const auto& c : concepts) reps.push_back(c.representation);
    std::sort(reps.begin(), reps.end());
    std::vector<std::string> codes;
    for (auto r : reps) codes.emplace_back(code(r));
    return join(codes, "+");
}

std::string MatchConfig::distance_key() const {
    return concepts_key() + "|" + std::string(to_string(interpolation)) + "|" +
           std::string(to_string(aggregation)) + "|" + to_string(band);
}

std::string MatchConfig::id() const { return distance_key() + "|k" + std::to_string(k); }

void validate(const MatchConfig& config) {
    if (config.concepts.empty() || config.concepts.size() > 3)
        throw ConfigError("a match configuration uses 1 to 3 concepts");
    std::set<std::string> names;
    bool any_raw = false, any_abstract = false;
    for (const auto& c : config.concepts) {
        if (!names.insert(c.concept_name).second) throw ConfigError("concept '" + c.concept_name + "' listed twice");
        (c.representation == Representation::raw ? any_raw : any_abstract) = true;
    }
    if (any_raw && any_abstract) throw ConfigError("a configuration is either all Raw or all abstractions");
    if (config.k < 1 || config.k % 2 == 0) throw ConfigError("k must be a positive odd integer");
    validate(config.timeline);
}

std::vector<ConceptRepresentation> parse_concepts_key(std::string_view key) {
    std::vector<ConceptRepresentation> out;
    for (auto part : split(key, ';')) {
        auto colon = part.rfind(':');
        if (colon == std::string_view::npos) throw ConfigError("expected '<concept>:<R|S|G|SG>', got '" + std::string(part) + "'");
        out.push_back({std::string(trim(part.substr(0, colon))), parse_representation(trim(part.substr(colon + 1)))});
    }
    return out;
}

std::string to_string(const GridBand& band) { return band.from_kb ? "kb" : to_string(band.band); }

GridBand parse_grid_band(std::string_view s) {
    if (s == "kb") return {Unconstrained{}, true};
    if (s == "sc") return {SakoeChibaPercent{10.0}, false};
    return {parse_band(s), false};
}

std::uint64_t experiment_count(int concepts, int max_concepts, int interpolations, int aggregations, int windows,
                               int neighbor_counts) {
    auto choose = [](std::uint64_t n, std::uint64_t k) {
        std::uint64_t r = 1;
        for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    };
    std::uint64_t representations = 0;
    std::uint64_t pow3 = 1;
    for (int k = 1; k <= max_concepts && k <= concepts; ++k) {
        pow3 *= 3;
        representations += choose(static_cast<std::uint64_t>(concepts), static_cast<std::uint64_t>(k)) * (pow3 + 1);
    }
    return representations * static_cast<std::uint64_t>(interpolations) * static_cast<std::uint64_t>(aggregations) *
           static_cast<std::uint64_t>(windows) * static_cast<std::uint64_t>(neighbor_counts);
}

std::vector<GridEntry> enumerate_experiments(const GridAxes& axes, const KnowledgeBase* kb) {
    if (axes.max_concepts > static_cast<int>(axes.concepts.size()))
        throw ConfigError("max_concepts exceeds the number of concepts");
    static constexpr Representation abstract_reps[] = {Representation::state, Representation::gradient,
                                                       Representation::state_and_gradient};
    std::vector<GridEntry> out;
    const int c = static_cast<int>(axes.concepts.size());

    auto emit_settings = [&](const std::vector<ConceptRepresentation>& reps) {
        std::vector<std::string> names;
        for (const auto& r : reps) names.push_back(r.concept_name);
        for (auto interp : axes.interpolations) {
            for (std::size_t a = 0; a < axes.aggregations.size(); ++a) {
                for (const auto& band : axes.bands) {
                    BandPolicy policy = band.band;
                    if (band.from_kb) {
                        if (!kb) throw ConfigError("a KB-derived band needs a knowledge base");
                        policy = KBBand{kb_band_radius(*kb, names, axes.granularity)};
                    }
                    for (int k : axes.ks) {
                        GridEntry e;
                        e.index = out.size();
                        e.config = {reps, interp, axes.aggregations[a], policy, k, axes.timeline, axes.granularity};
                        e.raw_duplicate = e.config.all_raw() && a > 0;
                        out.push_back(std::move(e));
                    }
                }
            }
        }
    };

    for (int size = 1; size <= axes.max_concepts; ++size) {
        // Lexicographic combinations of concept indices.
        std::vector<int> pick(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
        while (true) {
            std::vector<ConceptRepresentation> reps;
            for (int i : pick) reps.push_back({axes.concepts[static_cast<std::size_t>(i)], Representation::raw});
            emit_settings(reps);
            // Every S/G/SG assignment, odometer order.
            std::vector<int> digit(static_cast<std::size_t>(size), 0);
            while (true) {
                for (std::size_t i = 0; i < reps.size(); ++i) reps[i].representation = abstract_reps[digit[i]];
                emit_settings(reps);
                int pos = size - 1;
                while (pos >= 0 && ++digit[static_cast<std::size_t>(pos)] == 3) digit[static_cast<std::size_t>(pos--)] = 0;
                if (pos < 0) break;
            }
            int i = size - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == c - size + i) --i;
            if (i < 0) break;
            ++pick[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

GridAxes ExperimentConfig::axes(std::int64_t n_entities) const {
    GridAxes a;
    a.concepts = concepts;
    a.max_concepts = max_concepts;
    a.interpolations = interpolations;
    a.aggregations = aggregations;
    a.bands = bands;
    a.ks = ks ? *ks : k_values(n_entities);
    a.timeline = timeline;
    a.granularity = granularity;
    return a;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    std::string timeline_kind;
    AbsoluteTimeline abs;
    RelativeTimeline rel;
    bool has_abs_start = false, has_abs_end = false;
    bool has_max_concepts = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = line;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError("unterminated section header", line_no, 1);
            section = std::string(trim(body.substr(1, body.size() - 2)));
            if (section != "experiment" && section != "concepts" && section != "timeline" && section != "grid")
                throw ParseError("unknown section '" + section + "'", line_no, 2);
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key=value'", line_no, 1);
        const std::string key(trim(body.substr(0, eq)));
        const std::string_view value = trim(body.substr(eq + 1));
        const std::size_t value_col = static_cast<std::size_t>(value.data() - line.data()) + 1;

        try {
            if (section == "experiment") {
                if (key == "name") cfg.name = std::string(value);
                else if (key == "granularity") cfg.granularity = parse_granularity(value);
                else if (key == "positive_label") cfg.positive_label = std::string(value);
                else if (key == "population_attribute") cfg.population_attribute = std::string(value);
                else throw ParseError("unknown key '" + key + "' in [experiment]", line_no, 1);
            } else if (section == "concepts") {
                if (key != "names") throw ParseError("unknown key '" + key + "' in [concepts]", line_no, 1);
                for (auto n : split(value, ',')) cfg.concepts.emplace_back(n);
            } else if (section == "timeline") {
                if (key == "kind") timeline_kind = std::string(value);
                else if (key == "start") abs.start = parse_timestamp(value), has_abs_start = true;
                else if (key == "end") abs.end = parse_timestamp(value), has_abs_end = true;
                else if (key == "reference") rel.reference_concept = std::string(value);
                else if (key == "aspect") {
                    if (value == "start" || value == "start_time") rel.aspect = Aspect::start_time;
                    else if (value == "end" || value == "end_time") rel.aspect = Aspect::end_time;
                    else throw ConfigError("aspect must be 'start' or 'end'");
                } else if (key == "selection") {
                    if (value == "first") rel.selection = Selection::first();
                    else if (value == "last") rel.selection = Selection::last();
                    else if (value.substr(0, 4) == "nth:") rel.selection = Selection::nth(parse_int(value.substr(4)));
                    else throw ConfigError("selection must be first, last or nth:<n>");
                } else if (key == "before") rel.before_period = parse_duration(value);
                else if (key == "after") rel.after_period = parse_duration(value);
                else throw ParseError("unknown key '" + key + "' in [timeline]", line_no, 1);
            } else if (section == "grid") {
                if (key == "max_concepts") cfg.max_concepts = parse_int(value), has_max_concepts = true;
                else if (key == "folds") cfg.folds = parse_int(value);
                else if (key == "interpolations") {
                    cfg.interpolations.clear();
                    for (auto v : split(value, ',')) cfg.interpolations.push_back(parse_interpolation(v));
                } else if (key == "aggregations") {
                    cfg.aggregations.clear();
                    for (auto v : split(value, ',')) cfg.aggregations.push_back(parse_duration_delegate(v));
                } else if (key == "bands") {
                    cfg.bands.clear();
                    for (auto v : split(value, ',')) cfg.bands.push_back(parse_grid_band(v));
                } else if (key == "k") {
                    if (value == "auto") cfg.ks.reset();
                    else {
                        cfg.ks.emplace();
                        for (auto v : split(value, ',')) cfg.ks->push_back(parse_int(v));
                    }
                } else throw ParseError("unknown key '" + key + "' in [grid]", line_no, 1);
            } else {
                throw ParseError("key outside of a section", line_no, 1);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no, value_col);
        }
    }

    if (timeline_kind == "absolute") {
        if (!has_abs_start || !has_abs_end) throw ConfigError("absolute timeline needs start and end");
        cfg.timeline = abs;
    } else if (timeline_kind == "relative") {
        cfg.timeline = rel;
    } else {
        throw ConfigError("[timeline] kind must be 'absolute' or 'relative'");
    }
    validate(cfg.timeline);
    if (cfg.concepts.empty()) throw ConfigError("[concepts] names is empty");
    if (!has_max_concepts) cfg.max_concepts = std::min(3, static_cast<int>(cfg.concepts.size()));
    if (cfg.max_concepts < 1 || cfg.max_concepts > 3 || cfg.max_concepts > static_cast<int>(cfg.concepts.size()))
        throw ConfigError("max_concepts must be between 1 and min(3, number of concepts)");
    if (cfg.folds < 2) throw ConfigError("folds must be >= 2");
    if (cfg.interpolations.empty() || cfg.aggregations.empty() || cfg.bands.empty())
        throw ConfigError("grid axes must not be empty");
    if (cfg.ks)
        for (int k : *cfg.ks)
            if (k < 1 || k % 2 == 0) throw ConfigError("k values must be positive odd integers");
    return cfg;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_experiment_config(in);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open experiment config '" + path + "'");
    return parse_experiment_config(in);
}

std::string serialize_experiment_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[experiment]\nname=" << cfg.name << "\ngranularity=" << cfg.granularity.name << '\n';
    if (!cfg.positive_label.empty()) out << "positive_label=" << cfg.positive_label << '\n';
    if (!cfg.population_attribute.empty()) out << "population_attribute=" << cfg.population_attribute << '\n';
    out << "\n[concepts]\nnames=" << join(cfg.concepts, ",") << "\n\n[timeline]\n";
    if (const auto* abs = std::get_if<AbsoluteTimeline>(&cfg.timeline)) {
        out << "kind=absolute\nstart=" << timestamp_text(abs->start) << "\nend=" << timestamp_text(abs->end) << '\n';
    } else {
        const auto& rel = std::get<RelativeTimeline>(cfg.timeline);
        out << "kind=relative\nreference=" << rel.reference_concept
            << "\naspect=" << (rel.aspect == Aspect::start_time ? "start" : "end") << "\nselection=";
        switch (rel.selection.kind) {
            case Selection::Kind::first: out << "first"; break;
            case Selection::Kind::last: out << "last"; break;
            case Selection::Kind::nth: out << "nth:" << rel.selection.n; break;
        }
        out << "\nbefore=" << format_duration(rel.before_period) << "\nafter=" << format_duration(rel.after_period) << '\n';
    }
    std::vector<std::string> interps, aggs, bands;
    for (auto i : cfg.interpolations) interps.emplace_back(to_string(i));
    for (auto a : cfg.aggregations) aggs.emplace_back(to_string(a));
    for (const auto& b : cfg.bands) bands.push_back(to_string(b));
    out << "\n[grid]\nmax_concepts=" << cfg.max_concepts << "\ninterpolations=" << join(interps, ",")
        << "\naggregations=" << join(aggs, ",") << "\nbands=" << join(bands, ",") << "\nk=";
    if (cfg.ks) {
        std::vector<std::string> ks;
        for (int k : *cfg.ks) ks.push_back(std::to_string(k));
        out << join(ks, ",");
    } else {
        out << "auto";
    }
    out << "\nfolds=" << cfg.folds << '\n';
    return out.str();
}

}  // namespace idtw
