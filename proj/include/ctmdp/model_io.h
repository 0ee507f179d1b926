#pragma once

#include "ctmdp/model.h"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctmdp {

/// Malformed model file: bad JSON, missing fields, or unparsable numbers.
/// The message carries the JSON byte offset or the JSON path of the problem.
class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Ctmdp model_from_json(const nlohmann::json& doc);
Ctmdp parse_model(std::string_view text);
Ctmdp load_model(const std::string& path);

nlohmann::ordered_json model_to_json(const Ctmdp& model);
std::string dump_model(const Ctmdp& model);
void save_model(const Ctmdp& model, const std::string& path);

}  // namespace ctmdp
