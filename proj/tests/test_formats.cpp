#include "drfuse/csv.hpp"
#include "drfuse/grade.hpp"
#include "drfuse/manifest.hpp"
#include "drfuse/recipe.hpp"
#include "drfuse/tim.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

using namespace drfuse;
using testutil::TempDir;

static nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    nlohmann::json j;
    in >> j;
    return j;
}

TEST_CASE("csv line splitting and escaping", "[formats]") {
    CHECK(csv::split_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(csv::split_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(csv::split_line("\"a,b\",c") == std::vector<std::string>{"a,b", "c"});
    CHECK(csv::split_line("\"he said \"\"hi\"\"\",x") == std::vector<std::string>{"he said \"hi\"", "x"});
    CHECK(csv::split_line(csv::join({"a,b", "plain", "q\"q"})) ==
          std::vector<std::string>{"a,b", "plain", "q\"q"});
}

TEST_CASE("grade CSV io", "[formats]") {
    TempDir tmp;
    const std::vector<GradeRecord> records = {{"a", Grade::Normal}, {"b", Grade::Pdr}, {"c", Grade::Npdr}};
    const auto path = tmp / "grades.csv";
    write_grades_csv(path, records);
    CHECK(read_grades_csv(path) == records);

    SECTION("duplicate ids rejected") {
        std::ofstream(path) << "image_id,grade\nx,1\nx,2\n";
        CHECK_THROWS_MATCHES(read_grades_csv(path), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::DuplicateId;
                             }));
    }
    SECTION("grade out of range rejected") {
        std::ofstream(path) << "image_id,grade\nx,3\n";
        CHECK_THROWS_MATCHES(read_grades_csv(path), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::ParseError;
                             }));
    }
    SECTION("missing column rejected") {
        std::ofstream(path) << "id,grade\nx,1\n";
        CHECK_THROWS_AS(read_grades_csv(path), Error);
    }
}

TEST_CASE("prediction manifest CSV io", "[formats]") {
    TempDir tmp;
    PredictionManifest manifest;
    manifest.add({{"img1", LesionClass::Irma, Model::Mae, SourceResolution::Res1536, Rotation::Deg90},
                  ConvNextVariant::None,
                  tmp / "preds" / "a.png"});
    manifest.add({{"img1", LesionClass::Nonperfusion, Model::ConvNext, SourceResolution::Res1536, Rotation::Deg0},
                  ConvNextVariant::XL,
                  tmp / "preds" / "b.png"});
    manifest.add({{"img2", LesionClass::Irma, Model::SegFormer, SourceResolution::Res1024, Rotation::Deg0},
                  ConvNextVariant::None,
                  tmp / "preds" / "c.png"});

    const auto path = tmp / "manifest.csv";
    manifest.write_csv(path);

    const auto loaded = PredictionManifest::load_csv(path);
    REQUIRE(loaded.size() == 3);
    CHECK(loaded.image_ids() == std::vector<std::string>{"img1", "img2"});

    // paths were written relative to the CSV and resolved back against it
    const PredictionKey key{"img1", LesionClass::Irma, Model::Mae, SourceResolution::Res1536, Rotation::Deg90};
    const auto* entry = loaded.find(key);
    REQUIRE(entry);
    CHECK(entry->path == tmp / "preds" / "a.png");
    CHECK(entry->variant == ConvNextVariant::None);

    const auto* centry = loaded.find(
        {"img1", LesionClass::Nonperfusion, Model::ConvNext, SourceResolution::Res1536, Rotation::Deg0});
    REQUIRE(centry);
    CHECK(centry->variant == ConvNextVariant::XL);

    SECTION("duplicate keys rejected, variant not part of the key") {
        PredictionManifest dup;
        dup.add({{"x", LesionClass::Irma, Model::ConvNext, SourceResolution::Res1536, Rotation::Deg0},
                 ConvNextVariant::L,
                 "p1.png"});
        CHECK_THROWS_MATCHES(
            dup.add({{"x", LesionClass::Irma, Model::ConvNext, SourceResolution::Res1536, Rotation::Deg0},
                     ConvNextVariant::XL,
                     "p2.png"}),
            Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                return e.kind() == ErrorKind::DuplicateId;
            }));
    }
    SECTION("bad rotation rejected") {
        std::ofstream(path) << "image_id,class,model,variant,resolution,rotation,path\nx,1,m,,1536,45,p.png\n";
        CHECK_THROWS_MATCHES(PredictionManifest::load_csv(path), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::ParseError;
                             }));
    }
}

TEST_CASE("built-in recipes match the golden term lists", "[formats][ensemble]") {
    const std::filesystem::path golden_dir = DRFUSE_TEST_GOLDEN_DIR;
    const struct {
        const char* file;
        FusionRecipe recipe;
    } cases[] = {
        {"recipe_v1.json", recipe_v1()},
        {"recipe_v2.json", recipe_v2()},
        {"recipe_tim.json", recipe_tim()},
    };
    for (const auto& c : cases) {
        INFO(c.file);
        const auto golden = read_json(golden_dir / c.file);
        CHECK(nlohmann::json(recipe_to_json(c.recipe)) == golden);
        CHECK(recipe_from_json(golden) == c.recipe);
    }
}

TEST_CASE("recipe structure", "[formats][ensemble]") {
    SECTION("class 2 has exactly one term, classes 1 and 3 at least two") {
        for (const auto* name : {"v1", "v2", "tim"}) {
            const auto* r = find_builtin_recipe(name);
            REQUIRE(r);
            CHECK(r->terms_for(LesionClass::Nonperfusion).size() == 1);
            CHECK(r->terms_for(LesionClass::Irma).size() >= 2);
            CHECK(r->terms_for(LesionClass::Neovascularization).size() >= 2);
            // multi-angle only ever on 1536R terms
            for (LesionClass cls : kLesionClasses)
                for (const auto& t : r->terms_for(cls))
                    if (t.multi_angle)
                        CHECK(t.resolution == SourceResolution::Res1536);
        }
    }
    SECTION("unknown recipe name falls through to file lookup") {
        CHECK(find_builtin_recipe("v3") == nullptr);
        CHECK_THROWS_MATCHES(load_recipe("v3"), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::MissingFile;
                             }));
    }
    SECTION("custom recipe document round trip") {
        TempDir tmp;
        auto custom = recipe_v2();
        custom.name = "custom";
        const auto path = tmp / "custom.json";
        std::ofstream(path) << recipe_to_json(custom).dump(2);
        CHECK(load_recipe(path.string()) == custom);
    }
    SECTION("recipe with an empty class is invalid") {
        nlohmann::json j = recipe_to_json(recipe_v1());
        j["classes"]["2"] = nlohmann::json::array();
        CHECK_THROWS_MATCHES(recipe_from_json(j), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::InvalidConfig;
                             }));
    }
}

TEST_CASE("threshold config io", "[formats][tim]") {
    TempDir tmp;
    const auto defaults = default_thresholds();

    SECTION("json round trip") {
        const auto j = thresholds_to_json(defaults);
        const auto back = thresholds_from_json(j);
        CHECK(back.t_min == defaults.t_min);
        CHECK(back.t_max == defaults.t_max);
        CHECK(back.reference_dims == defaults.reference_dims);
    }
    SECTION("file round trip") {
        const auto path = tmp / "thresholds.json";
        std::ofstream(path) << thresholds_to_json(defaults).dump(2);
        const auto back = load_thresholds(path);
        CHECK(back.t_min == defaults.t_min);
        CHECK(back.t_max == defaults.t_max);
    }
    SECTION("inverted thresholds rejected") {
        auto j = thresholds_to_json(defaults);
        j["t_min"][0] = 7000; // above t_max[0]
        CHECK_THROWS_MATCHES(thresholds_from_json(j), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::InvalidConfig;
                             }));
    }
}
