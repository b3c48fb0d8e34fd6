#include "idtw/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace idtw::log {
namespace {

std::mutex g_mutex;
Level g_min_level = Level::warn;

const char* level_name(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warning";
        case Level::error: return "error";
    }
    return "?";
}

void stderr_sink(Level level, std::string_view message) {
    std::cerr << "[idtw " << level_name(level) << "] " << message << '\n';
}

Sink& sink_ref() {
    static Sink sink = stderr_sink;
    return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
    std::lock_guard lock(g_mutex);
    Sink previous = std::move(sink_ref());
    sink_ref() = sink ? std::move(sink) : Sink(stderr_sink);
    return previous;
}

void set_min_level(Level level) {
    std::lock_guard lock(g_mutex);
    g_min_level = level;
}

void write(Level level, std::string_view message) {
    std::lock_guard lock(g_mutex);
    if (level < g_min_level) return;
    sink_ref()(level, message);
}

}  // namespace idtw::log
