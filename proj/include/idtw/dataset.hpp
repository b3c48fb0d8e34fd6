#pragma once

// Record ingestion. Line formats (comma separated, '#' comments, optional header):
//   samples:    entity_id,concept,timestamp,value
//   events:     entity_id,event_name,timestamp[,end_timestamp]
//   labels:     entity_id,label
//   attributes: entity_id,attribute,value
// Timestamps are integer minutes or ISO-8601 dates.

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "idtw/scoping.hpp"
#include "idtw/temporal.hpp"

namespace idtw {

struct EntityRecord {
    std::map<std::string, std::vector<Sample>> samples;  // per concept, strictly time-ordered
    std::vector<Event> events;                           // time-ordered
    std::map<std::string, std::string> attributes;
};

struct Dataset {
    std::map<std::string, EntityRecord> entities;
    std::map<std::string, std::string> labels;

    // Sorted ids of entities that have a label.
    std::vector<std::string> labeled_entities() const;
    // Sorted distinct labels.
    std::vector<std::string> classes() const;
};

// Each reader appends into `ds`; samples are sorted afterwards and duplicate
// timestamps within one concept raise DataError.
void read_samples(std::istream& in, Dataset& ds);
void read_events(std::istream& in, Dataset& ds);
void read_labels(std::istream& in, Dataset& ds);
void read_attributes(std::istream& in, Dataset& ds);

struct DatasetPaths {
    std::string samples;
    std::string events;      // optional
    std::string labels;      // optional
    std::string attributes;  // optional
};

Dataset load_dataset(const DatasetPaths& paths);

void write_samples(std::ostream& out, const Dataset& ds);
void write_events(std::ostream& out, const Dataset& ds);
void write_labels(std::ostream& out, const Dataset& ds);
void write_attributes(std::ostream& out, const Dataset& ds);

}  // namespace idtw
