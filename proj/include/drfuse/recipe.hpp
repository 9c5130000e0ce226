#pragma once

#include "drfuse/error.hpp"
#include "drfuse/manifest.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace drfuse {

/// One union term of a fusion recipe: which model output, at which source
/// resolution, and whether the multi-angle rotations are folded in.
struct RecipeTerm {
    Model model;
    ConvNextVariant variant = ConvNextVariant::None;
    SourceResolution resolution;
    bool multi_angle = false;

    friend bool operator==(const RecipeTerm&, const RecipeTerm&) = default;
};

/// Declarative description of the per-class union. Built-in recipes are
/// v1 (challenge), v2 (post-challenge) and tim (grade-revision framework).
struct FusionRecipe {
    std::string name;
    std::array<std::vector<RecipeTerm>, 3> class_terms;

    const std::vector<RecipeTerm>& terms_for(LesionClass c) const { return class_terms[class_index(c)]; }

    void validate() const {
        for (std::size_t i = 0; i < class_terms.size(); ++i)
            if (class_terms[i].empty())
                raise(ErrorKind::InvalidConfig,
                      "recipe '" + name + "' has no terms for class " + std::to_string(i + 1));
    }

    friend bool operator==(const FusionRecipe&, const FusionRecipe&) = default;
};

/// Multi-angle rotation applies only to the 1536R terms of classes 1 and 3.
inline FusionRecipe recipe_v1() {
    FusionRecipe r;
    r.name = "v1";
    const std::vector<RecipeTerm> mask_a = {
        {Model::Mae, ConvNextVariant::None, SourceResolution::Res1536, true},
        {Model::SegFormer, ConvNextVariant::None, SourceResolution::Res1024, false},
        {Model::SegFormer, ConvNextVariant::None, SourceResolution::Res1536, true},
    };
    r.class_terms[0] = mask_a;
    r.class_terms[1] = {{Model::ConvNext, ConvNextVariant::L, SourceResolution::Res1536, false}};
    r.class_terms[2] = mask_a;
    return r;
}

inline FusionRecipe recipe_v2() {
    FusionRecipe r;
    r.name = "v2";
    const std::vector<RecipeTerm> mask_a = {
        {Model::Mae, ConvNextVariant::None, SourceResolution::Res1536, true},
        {Model::ConvNext, ConvNextVariant::XL, SourceResolution::Res1536, true},
        {Model::SegFormer, ConvNextVariant::None, SourceResolution::Res1024, false},
        {Model::SegFormer, ConvNextVariant::None, SourceResolution::Res1536, true},
    };
    r.class_terms[0] = mask_a;
    r.class_terms[1] = {{Model::ConvNext, ConvNextVariant::XL, SourceResolution::Res1536, false}};
    r.class_terms[2] = mask_a;
    return r;
}

inline FusionRecipe recipe_tim() {
    FusionRecipe r;
    r.name = "tim";
    const std::vector<RecipeTerm> mask_a = {
        {Model::Mae, ConvNextVariant::None, SourceResolution::Res1536, true},
        {Model::SegFormer, ConvNextVariant::None, SourceResolution::Res1024, false},
        {Model::SegFormer, ConvNextVariant::None, SourceResolution::Res1536, true},
    };
    r.class_terms[0] = mask_a;
    r.class_terms[1] = {{Model::Mae, ConvNextVariant::None, SourceResolution::Res1536, false}};
    r.class_terms[2] = mask_a;
    return r;
}

inline const FusionRecipe* find_builtin_recipe(const std::string& name) {
    static const FusionRecipe v1 = recipe_v1();
    static const FusionRecipe v2 = recipe_v2();
    static const FusionRecipe tim = recipe_tim();
    if (name == "v1") return &v1;
    if (name == "v2") return &v2;
    if (name == "tim") return &tim;
    return nullptr;
}

inline nlohmann::ordered_json recipe_to_json(const FusionRecipe& recipe) {
    nlohmann::ordered_json j;
    j["name"] = recipe.name;
    nlohmann::ordered_json classes;
    for (std::size_t i = 0; i < recipe.class_terms.size(); ++i) {
        nlohmann::ordered_json terms = nlohmann::ordered_json::array();
        for (const auto& t : recipe.class_terms[i]) {
            nlohmann::ordered_json jt;
            jt["model"] = std::string(1, model_letter(t.model));
            if (t.variant != ConvNextVariant::None)
                jt["variant"] = to_string(t.variant);
            jt["resolution"] = resolution_value(t.resolution);
            jt["multi_angle"] = t.multi_angle;
            terms.push_back(std::move(jt));
        }
        classes[std::to_string(i + 1)] = std::move(terms);
    }
    j["classes"] = std::move(classes);
    return j;
}

inline FusionRecipe recipe_from_json(const nlohmann::json& j) {
    try {
        FusionRecipe recipe;
        recipe.name = j.at("name").get<std::string>();
        const auto& classes = j.at("classes");
        for (std::size_t i = 0; i < 3; ++i) {
            const auto key = std::to_string(i + 1);
            if (!classes.contains(key))
                raise(ErrorKind::ParseError, "recipe is missing class " + key);
            for (const auto& jt : classes.at(key)) {
                RecipeTerm t;
                t.model = model_from_string(jt.at("model").get<std::string>());
                t.variant = jt.contains("variant") ? variant_from_string(jt.at("variant").get<std::string>())
                                                   : ConvNextVariant::None;
                t.resolution = resolution_from_int(jt.at("resolution").get<long long>());
                t.multi_angle = jt.at("multi_angle").get<bool>();
                recipe.class_terms[i].push_back(t);
            }
        }
        recipe.validate();
        return recipe;
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::ParseError, std::string("bad recipe document: ") + e.what());
    }
}

/// Resolve a --recipe argument: a built-in name (v1|v2|tim) or a path to a
/// recipe JSON document.
inline FusionRecipe load_recipe(const std::string& name_or_path) {
    if (const auto* builtin = find_builtin_recipe(name_or_path))
        return *builtin;
    if (!std::filesystem::exists(name_or_path))
        raise(ErrorKind::MissingFile, "recipe '" + name_or_path + "' is neither built-in nor a file");
    std::ifstream in(name_or_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::ParseError, name_or_path + ": " + e.what());
    }
    return recipe_from_json(j);
}

} // namespace drfuse
