#include "idtw/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <string_view>

#include "idtw/error.hpp"

namespace idtw {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return fields;
}

double parse_value(std::string_view s) {
    if (s == "true" || s == "TRUE" || s == "True") return 1.0;
    if (s == "false" || s == "FALSE" || s == "False") return 0.0;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("invalid value '" + std::string(s) + "'");
    return v;
}

bool is_header(std::string_view first_field) {
    return first_field == "entity_id" || first_field == "entity";
}

// Calls `fn(fields, line_no)` for every data line with between min and max fields.
template <typename Fn>
void for_each_record(std::istream& in, std::size_t min_fields, std::size_t max_fields, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = line;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        auto fields = split_fields(body);
        if (line_no == 1 && is_header(fields[0])) continue;
        if (fields.size() < min_fields || fields.size() > max_fields)
            throw ParseError("expected " + std::to_string(min_fields) + (min_fields == max_fields ? "" : "+") +
                                 " comma-separated fields, got " + std::to_string(fields.size()),
                             line_no);
        if (fields[0].empty()) throw ParseError("empty entity id", line_no, 1);
        try {
            fn(fields, line_no);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no);
        }
    }
}

void normalize_samples(Dataset& ds) {
    for (auto& [entity, record] : ds.entities) {
        for (auto& [concept_name, samples] : record.samples) {
            std::stable_sort(samples.begin(), samples.end(),
                             [](const Sample& a, const Sample& b) { return a.time < b.time; });
            for (std::size_t i = 1; i < samples.size(); ++i)
                if (samples[i].time == samples[i - 1].time)
                    throw DataError("entity '" + entity + "', concept '" + concept_name +
                                    "': duplicate timestamp " + std::to_string(samples[i].time));
        }
        std::stable_sort(record.events.begin(), record.events.end(),
                         [](const Event& a, const Event& b) { return a.start < b.start; });
    }
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return in;
}

}  // namespace

std::vector<std::string> Dataset::labeled_entities() const {
    std::vector<std::string> ids;
    for (const auto& [id, label] : labels) ids.push_back(id);
    return ids;
}

std::vector<std::string> Dataset::classes() const {
    std::set<std::string> s;
    for (const auto& [id, label] : labels) s.insert(label);
    return {s.begin(), s.end()};
}

void read_samples(std::istream& in, Dataset& ds) {
    for_each_record(in, 4, 4, [&](const auto& f, std::size_t) {
        if (f[1].empty()) throw Error("empty concept name");
        ds.entities[std::string(f[0])].samples[std::string(f[1])].push_back(
            {parse_timestamp(f[2]), parse_value(f[3])});
    });
    normalize_samples(ds);
}

void read_events(std::istream& in, Dataset& ds) {
    for_each_record(in, 3, 4, [&](const auto& f, std::size_t) {
        Event e{std::string(f[1]), parse_timestamp(f[2]), 0};
        e.end = f.size() == 4 && !f[3].empty() ? parse_timestamp(f[3]) : e.start;
        if (e.end < e.start) throw Error("event ends before it starts");
        ds.entities[std::string(f[0])].events.push_back(std::move(e));
    });
    normalize_samples(ds);
}

void read_labels(std::istream& in, Dataset& ds) {
    for_each_record(in, 2, 2, [&](const auto& f, std::size_t) {
        if (f[1].empty()) throw Error("empty label");
        ds.labels[std::string(f[0])] = std::string(f[1]);
    });
}

void read_attributes(std::istream& in, Dataset& ds) {
    for_each_record(in, 3, 3, [&](const auto& f, std::size_t) {
        ds.entities[std::string(f[0])].attributes[std::string(f[1])] = std::string(f[2]);
    });
}

Dataset load_dataset(const DatasetPaths& paths) {
    Dataset ds;
    auto read = [&](const std::string& path, auto reader) {
        if (path.empty()) return;
        auto in = open(path);
        try {
            reader(in, ds);
        } catch (const Error& e) {
            throw DataError(path + ": " + e.what());
        }
    };
    read(paths.samples, read_samples);
    read(paths.events, read_events);
    read(paths.labels, read_labels);
    read(paths.attributes, read_attributes);
    return ds;
}

void write_samples(std::ostream& out, const Dataset& ds) {
    out << "entity_id,concept,timestamp,value\n";
    for (const auto& [entity, record] : ds.entities)
        for (const auto& [concept_name, samples] : record.samples)
            for (const auto& s : samples)
                out << entity << ',' << concept_name << ',' << s.time << ',' << format_number(s.value) << '\n';
}

void write_events(std::ostream& out, const Dataset& ds) {
    out << "entity_id,event_name,timestamp,end_timestamp\n";
    for (const auto& [entity, record] : ds.entities)
        for (const auto& e : record.events) out << entity << ',' << e.name << ',' << e.start << ',' << e.end << '\n';
}

void write_labels(std::ostream& out, const Dataset& ds) {
    out << "entity_id,label\n";
    for (const auto& [entity, label] : ds.labels) out << entity << ',' << label << '\n';
}

void write_attributes(std::ostream& out, const Dataset& ds) {
    out << "entity_id,attribute,value\n";
    for (const auto& [entity, record] : ds.entities)
        for (const auto& [k, v] : record.attributes) out << entity << ',' << k << ',' << v << '\n';
}

}  // namespace idtw
