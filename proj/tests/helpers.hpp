#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "zsplit/core.hpp"

namespace testutil {

/// identity "" means identity-missing.
inline zsplit::Record rec(std::string id, std::string identity,
                          std::initializer_list<int> labels) {
    zsplit::Record r;
    r.image_id = std::move(id);
    if (!identity.empty()) r.identity = std::move(identity);
    for (int v : labels) r.labels.push_back(static_cast<std::uint8_t>(v));
    return r;
}

inline zsplit::Dataset make_dataset(std::vector<std::string> attrs,
                                    std::vector<zsplit::Record> records) {
    zsplit::Dataset d;
    d.catalog.names = std::move(attrs);
    d.records = std::move(records);
    return d;
}

/// Dataset plus assignment with exact per-partition identity and image
/// counts: images are spread round-robin over that partition's identities.
/// All labels zero unless attribute count is grown by the caller.
struct CountsFixture {
    zsplit::Dataset dataset;
    zsplit::SplitAssignment assignment;
};

inline CountsFixture counts_fixture(const std::array<std::size_t, 3>& identities,
                                    const std::array<std::size_t, 3>& images,
                                    std::size_t attribute_count = 2) {
    CountsFixture fx;
    for (std::size_t j = 0; j < attribute_count; ++j) {
        fx.dataset.catalog.names.push_back("a" + std::to_string(j));
    }
    const char* tag[3] = {"tr", "va", "te"};
    for (int p = 0; p < 3; ++p) {
        for (std::size_t i = 0; i < images[p]; ++i) {
            zsplit::Record r;
            r.image_id = std::string(tag[p]) + "_img" + std::to_string(i);
            r.identity = std::string(tag[p]) + "_id" + std::to_string(i % identities[p]);
            r.labels.assign(attribute_count, 0);
            fx.assignment.partition_of.emplace(r.image_id, static_cast<zsplit::Partition>(p));
            fx.dataset.records.push_back(std::move(r));
        }
    }
    return fx;
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& label) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                (label + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace testutil
