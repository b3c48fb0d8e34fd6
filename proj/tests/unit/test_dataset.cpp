#include "doctest.h"

#include <sstream>

#include "idtw/dataset.hpp"
#include "idtw/error.hpp"

using namespace idtw;

TEST_CASE("samples are read, sorted and round-tripped") {
    std::istringstream in("entity_id,concept,timestamp,value\n"
                          "E2,WBC,200,4.5\n"
                          "E1,WBC,1970-01-02,3\n"
                          "E1,WBC,100,2.5  # comment\n"
                          "\n"
                          "E1,HGB,50,11\n");
    Dataset ds;
    read_samples(in, ds);
    const auto& wbc = ds.entities.at("E1").samples.at("WBC");
    REQUIRE(wbc.size() == 2);
    CHECK(wbc[0].time == 100);
    CHECK(wbc[1].time == kMinutesPerDay);
    CHECK(wbc[1].value == 3);

    std::ostringstream out;
    write_samples(out, ds);
    Dataset back;
    std::istringstream again(out.str());
    read_samples(again, back);
    CHECK(back.entities.at("E1").samples.at("WBC")[1].value == 3);
    CHECK(back.entities.at("E2").samples.at("WBC")[0].value == 4.5);
    std::ostringstream out2;
    write_samples(out2, back);
    CHECK(out2.str() == out.str());
}

TEST_CASE("events, labels and attributes") {
    Dataset ds;
    std::istringstream ev("E1,BMT,500\nE1,BMT,100,160\n");
    read_events(ev, ds);
    const auto& events = ds.entities.at("E1").events;
    REQUIRE(events.size() == 2);
    CHECK(events[0].start == 100);
    CHECK(events[0].end == 160);
    CHECK(events[1].end == 500);

    std::istringstream lab("entity_id,label\nE1,GVHD\nE2,NONE\nE3,GVHD\n");
    read_labels(lab, ds);
    CHECK(ds.labeled_entities() == std::vector<std::string>{"E1", "E2", "E3"});
    CHECK(ds.classes() == std::vector<std::string>{"GVHD", "NONE"});

    std::istringstream attr("E1,sex,FEMALE\n");
    read_attributes(attr, ds);
    CHECK(ds.entities.at("E1").attributes.at("sex") == "FEMALE");
}

TEST_CASE("malformed records report their line") {
    Dataset ds;
    std::istringstream bad("E1,WBC,100,2\nE1,WBC,abc,2\n");
    try {
        read_samples(bad, ds);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream short_line("E1,WBC,100\n");
    CHECK_THROWS_AS(read_samples(short_line, ds), ParseError);
    std::istringstream no_id(",WBC,100,1\n");
    CHECK_THROWS_AS(read_samples(no_id, ds), ParseError);
    std::istringstream backwards("E1,BMT,500,100\n");
    CHECK_THROWS_AS(read_events(backwards, ds), ParseError);
}

TEST_CASE("duplicate timestamps are rejected") {
    Dataset ds;
    std::istringstream dup("E1,WBC,100,2\nE1,WBC,100,3\n");
    CHECK_THROWS_AS(read_samples(dup, ds), DataError);
}
