#pragma once

#include "coaat/engine.hpp"
#include "json.hpp"

namespace coaat::wire {

using json = nlohmann::ordered_json;

json to_json(const Receipt& r, const FeeSchedule& schedule);
json to_json(const UserRecord& u);
json to_json(const Property& p);
json to_json(const DocumentRecord& d);
json to_json(const Dossier& d);
json to_json(const DossierSummary& s);
json to_json(const Event& e);
json to_json(const CostReport& report, const FeeSchedule& schedule);
json chain_lines(std::span<const Block> blocks, const FeeSchedule& schedule);

}  // namespace coaat::wire
