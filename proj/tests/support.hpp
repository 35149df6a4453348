#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "readloop/readloop.hpp"

namespace support {

inline std::filesystem::path source_dir() { return READLOOP_SOURCE_DIR; }

inline std::filesystem::path fixture(const std::string& subject) { return source_dir() / "data" / "ontologies" / (subject + ".yaml"); }

inline const readloop::Ontology& ontology(const std::string& subject) {
    static std::map<std::string, readloop::Ontology> cache;
    auto it = cache.find(subject);
    if (it == cache.end()) it = cache.emplace(subject, readloop::parse_ontology(readloop::read_text_file(fixture(subject)))).first;
    return it->second;
}

inline const readloop::FamiliarWordList& words() {
    static const auto list = readloop::FamiliarWordList::load(source_dir() / "data" / "familiar_words.txt");
    return list;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::mt19937_64 gen{std::random_device{}()};
    auto dir = std::filesystem::temp_directory_path() / ("readloop_" + tag + "_" + std::to_string(gen()));
    std::filesystem::create_directories(dir);
    return dir;
}

inline readloop::SynthesisSpec cs_spec() {
    readloop::SynthesisSpec s;
    s.lo_ids = {"cs_lo07_1", "cs_lo07_2", "cs_lo08_1", "cs_lo08_2"};
    return s;
}

}  // namespace support
