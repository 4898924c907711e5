#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "drivepred/ingestion.hpp"
#include "generators.hpp"

using namespace drivepred;
using namespace drivepred::ingestion;

namespace {

std::string full_header() {
    std::string h;
    for (const auto& c : channel_registry()) h += (h.empty() ? "" : ",") + std::string(c.name);
    return h;
}

RecordingMatrix parse(const std::string& text) {
    std::istringstream in(text);
    return load_recording(in);
}

// Three samples with every selected channel and the target; `cell(id, s)`
// overrides individual cells (empty string = missing).
std::string small_csv(const std::map<std::pair<int, int>, std::string>& cell = {}) {
    const std::vector<int> ids{2, 9, 16, 17, 18, 19, 22, 23, 26};
    std::ostringstream out;
    for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << channel(ids[i]).name;
    out << "\n";
    for (int s = 0; s < 3; ++s) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto it = cell.find({ids[i], s});
            out << (i ? "," : "") << (it != cell.end() ? it->second : std::to_string(ids[i] * 10 + s));
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("registry holds channels 1..27 in order") {
    const auto& reg = channel_registry();
    std::set<std::string_view> names;
    for (int i = 0; i < kChannelCount; ++i) {
        CHECK(reg[i].id == i + 1);
        names.insert(reg[i].name);
    }
    CHECK(names.size() == 27u);
}

TEST_CASE("selected channels are exactly the seven route features") {
    std::vector<int> selected;
    for (const auto& c : channel_registry()) {
        if (c.selected) selected.push_back(c.id);
    }
    CHECK(selected == std::vector<int>{16, 17, 18, 19, 22, 23, 26});
}

TEST_CASE("velocity_kmh_raw is the only target") {
    for (const auto& c : channel_registry()) CHECK(c.target == (c.id == 9));
    CHECK(channel(9).name == "velocity_kmh_raw");
    CHECK(channel_id("velocity_kmh_raw") == 9);
}

TEST_CASE("registry descriptions match the recorded channel table") {
    CHECK(channel(18).description.rfind("Traffic light index", 0) == 0);
    CHECK(channel(16).name == "spd_lim");
    CHECK(channel(16).description == "Speed limit from regulation");
    CHECK(channel(23).description == "Road curvature in 1/m");
    CHECK(channel(26).name == "slope");
    CHECK_FALSE(channel_id("foo").has_value());
}

TEST_CASE("a 27-column file with 100 rows loads as 27 x 100") {
    std::ostringstream csv;
    csv << full_header() << "\n";
    for (int r = 0; r < 100; ++r) {
        for (int c = 0; c < 27; ++c) csv << (c ? "," : "") << r * 0.5 + c;
        csv << "\n";
    }
    const auto rec = parse(csv.str());
    CHECK(rec.channels() == 27u);
    CHECK(rec.samples() == 100u);
    CHECK(rec.channel_ids[8] == 9);
    CHECK(rec.values(8, 3) == doctest::Approx(1.5 + 8));
}

TEST_CASE("unknown column names are a schema error listing the valid names") {
    try {
        parse("t,foo\n1,2\n");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        const std::string what = e.what();
        CHECK(what.find("foo") != std::string::npos);
        CHECK(what.find("velocity_kmh_raw") != std::string::npos);
    }
}

TEST_CASE("ragged rows report their row number") {
    try {
        parse("t,velocity_kmh_raw\n1,2\n3\n");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("non-numeric cells report row and column") {
    try {
        parse("t,velocity_kmh_raw\n1,2\n3,fast\n");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find("row 3") != std::string::npos);
        CHECK(what.find("column 2") != std::string::npos);
    }
}

TEST_CASE("blank cells are missing") {
    const auto rec = parse("t,velocity_kmh_raw\n1,\n2,35.2\n");
    const auto v = extract_target(rec);
    REQUIRE(v.size() == 2u);
    CHECK(is_missing(v[0]));
    CHECK(v[1] == 35.2);
}

TEST_CASE("sample rate outside 1..10 Hz is rejected") {
    std::istringstream in("t\n1\n");
    CHECK_THROWS_AS(load_recording(in, 20.0), DataError);
}

TEST_CASE("extract_target projects channel 9") {
    const auto rec = parse("velocity_kmh_raw,t\n0,0\n35.2,1\n144,2\n");
    CHECK(extract_target(rec) == std::vector<double>{0, 35.2, 144});
    const auto no_target = parse("t\n1\n");
    CHECK_THROWS_AS(extract_target(no_target), MissingChannelError);
}

TEST_CASE("select_features orders columns by channel id") {
    const auto rec = parse(small_csv());
    const auto ds = select_features(rec, {0, 1, 2});
    CHECK(ds.feature_names ==
          std::vector<std::string>{"spd_lim", "tfc_flw", "traf_lig", "tfc_sgn", "toll_booth", "curvature", "slope"});
    REQUIRE(ds.features.rows() == 3u);
    CHECK(ds.features(1, 0) == 161.0);
    CHECK(ds.features(1, 6) == 261.0);
}

TEST_CASE("a row with a missing selected value is dropped with its label") {
    const auto rec = parse(small_csv({{{16, 1}, ""}}));
    const auto ds = select_features(rec, {4, 5, 6});
    REQUIRE(ds.size() == 2u);
    CHECK(ds.labels == std::vector<Label>{4, 6});
    CHECK(ds.features(1, 0) == 162.0);
}

TEST_CASE("missing targets and missing labels drop rows") {
    const auto rec = parse(small_csv({{{9, 0}, ""}}));
    CHECK(select_features(rec, {1, 2, 3}).labels == std::vector<Label>{2, 3});
    CHECK(select_features(parse(small_csv()), {1, kMissingLabel, 3}).labels == std::vector<Label>{1, 3});
}

TEST_CASE("an entirely missing selected channel names the channel") {
    const auto rec = parse(small_csv({{{23, 0}, ""}, {{23, 1}, ""}, {{23, 2}, ""}}));
    try {
        select_features(rec, {0, 0, 0});
        FAIL("expected MissingChannelError");
    } catch (const MissingChannelError& e) {
        CHECK(e.id() == 23);
        CHECK(std::string(e.what()).find("curvature") != std::string::npos);
    }
}

TEST_CASE("an absent selected channel is a missing-channel error") {
    const auto rec = parse("t,velocity_kmh_raw,spd_lim\n1,2,3\n");
    CHECK_THROWS_AS(select_features(rec, {0}), MissingChannelError);
}

TEST_CASE("label count must match sample count") {
    CHECK_THROWS_AS(select_features(parse(small_csv()), {0, 1}), DataError);
}

TEST_CASE("toll_booth values pass through unchanged") {
    const auto rec = parse(small_csv({{{22, 0}, "3"}}));
    CHECK(select_features(rec, {0, 0, 0}).features(0, 4) == 3.0);
}

TEST_CASE("property: selection never yields missing values and never grows") {
    gen::Source g(5);
    for (int trial = 0; trial < 100; ++trial) {
        RecordingMatrix rec;
        rec.channel_ids = {9, 16, 17, 18, 19, 22, 23, 26};
        const std::size_t n = g.size(1, 60);
        rec.values = Matrix(rec.channel_ids.size(), n);
        for (std::size_t c = 0; c < rec.channels(); ++c) {
            for (std::size_t s = 0; s < n; ++s) rec.values(c, s) = g.coin(0.1) ? kMissing : g.real(0.0, 100.0);
        }
        std::vector<Label> labels(n);
        for (auto& l : labels) l = g.coin(0.05) ? kMissingLabel : g.integer(0, 14);
        LabeledDataset ds;
        try {
            ds = select_features(rec, labels);
        } catch (const MissingChannelError&) {
            continue;
        }
        CHECK(ds.size() <= n);
        CHECK(ds.features.rows() == ds.size());
        for (double v : ds.features.data()) CHECK_FALSE(is_missing(v));
        for (Label l : ds.labels) CHECK(l >= 0);
    }
}

TEST_CASE("property: write then load is the identity") {
    gen::Source g(17);
    for (int trial = 0; trial < 50; ++trial) {
        RecordingMatrix rec;
        std::vector<int> ids(27);
        for (int i = 0; i < 27; ++i) ids[i] = i + 1;
        for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[g.size(0, i - 1)]);
        ids.resize(g.size(1, 27));
        rec.channel_ids = ids;
        const std::size_t n = g.size(0, 30);
        rec.values = Matrix(ids.size(), n);
        for (std::size_t c = 0; c < ids.size(); ++c) {
            for (std::size_t s = 0; s < n; ++s) {
                rec.values(c, s) = g.coin(0.05) ? kMissing : g.real(-1.0, 1.0) * std::pow(10.0, g.integer(-12, 12));
            }
        }
        std::stringstream io;
        write_recording(io, rec);
        const auto back = load_recording(io);
        REQUIRE(back.channel_ids == rec.channel_ids);
        REQUIRE(back.samples() == n);
        for (std::size_t c = 0; c < ids.size(); ++c) {
            for (std::size_t s = 0; s < n; ++s) {
                const double a = rec.values(c, s);
                const double b = back.values(c, s);
                CHECK((is_missing(a) ? is_missing(b) : a == b));
            }
        }
    }
}

TEST_CASE("a UTF-8 byte order mark before the header is ignored") {
    const auto rec = parse("\xEF\xBB\xBFt,velocity_kmh_raw\n1,2\n");
    CHECK(rec.channel_ids == std::vector<int>{2, 9});
}
