#include "nakasim/trace.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace nakasim {

using nlohmann::json;

namespace {

struct KindSchema {
    EventKind kind;
    const char* name;
    // names of a..e, nullptr when unused
    std::array<const char*, 5> fields;
    const char* flag;  // name of the boolean, nullptr when unused
    const char* x;     // name of the real field
};

const std::array<KindSchema, 13> kSchemas = {{
    {EventKind::Bpo, "Bpo", {"node", "seq", nullptr, nullptr, nullptr}, "honest", nullptr},
    {EventKind::BlockProduced, "BlockProduced", {"block", "parent", "node", "bpo_slot", "bpo_seq"}, "honest", "height"},
    {EventKind::HeaderDelivered, "HeaderDelivered", {"node", "block", nullptr, nullptr, nullptr}, nullptr, nullptr},
    {EventKind::ContentUploaded, "ContentUploaded", {"block", nullptr, nullptr, nullptr, nullptr}, nullptr, nullptr},
    {EventKind::ContentFetched, "ContentFetched", {"node", "block", nullptr, nullptr, nullptr}, nullptr, "credit"},
    {EventKind::PretendEmpty, "PretendEmpty", {"node", "block", nullptr, nullptr, nullptr}, nullptr, nullptr},
    {EventKind::ChainSwitched, "ChainSwitched", {"node", "old_tip", "new_tip", "height", nullptr}, nullptr, nullptr},
    {EventKind::EquivocationSeen, "EquivocationSeen", {"node", "block", "other", nullptr, nullptr}, nullptr, nullptr},
    {EventKind::ProofIncluded, "ProofIncluded", {"block", "target", "depth", nullptr, nullptr}, nullptr, nullptr},
    {EventKind::Blanked, "Blanked", {"node", "block", nullptr, nullptr, nullptr}, nullptr, nullptr},
    {EventKind::AdversaryRelease, "AdversaryRelease", {"tip", "headers", "content_block", nullptr, nullptr}, nullptr, nullptr},
    {EventKind::LeadSample, "LeadSample", {"lead", nullptr, nullptr, nullptr, nullptr}, nullptr, nullptr},
    {EventKind::LedgerOutput, "LedgerOutput", {"node", "tip", "length", nullptr, nullptr}, nullptr, nullptr},
}};

const KindSchema& schema(EventKind k) { return kSchemas[static_cast<std::size_t>(k)]; }

}  // namespace

const char* kind_name(EventKind k) { return schema(k).name; }

bool kind_from_name(const std::string& s, EventKind& out)
{
    for (const auto& sc : kSchemas) {
        if (s == sc.name) {
            out = sc.kind;
            return true;
        }
    }
    return false;
}

std::string event_to_json(const TraceEvent& e)
{
    const KindSchema& sc = schema(e.kind);
    json j;
    j["slot"] = e.slot;
    j["kind"] = sc.name;
    const std::int64_t* vals[5] = {&e.a, &e.b, &e.c, &e.d, &e.e};
    for (int i = 0; i < 5; ++i)
        if (sc.fields[i])
            j[sc.fields[i]] = *vals[i];
    if (sc.flag)
        j[sc.flag] = e.flag;
    if (sc.x)
        j[sc.x] = e.x;
    return j.dump();
}

TraceEvent event_from_json(const std::string& line)
{
    json j = json::parse(line);
    TraceEvent e;
    e.slot = j.at("slot").get<Slot>();
    if (!kind_from_name(j.at("kind").get<std::string>(), e.kind))
        throw std::runtime_error("unknown trace event kind: " + j.at("kind").get<std::string>());
    const KindSchema& sc = schema(e.kind);
    std::int64_t* vals[5] = {&e.a, &e.b, &e.c, &e.d, &e.e};
    for (int i = 0; i < 5; ++i)
        if (sc.fields[i])
            *vals[i] = j.at(sc.fields[i]).get<std::int64_t>();
    if (sc.flag)
        e.flag = j.at(sc.flag).get<bool>();
    if (sc.x)
        e.x = j.at(sc.x).get<double>();
    return e;
}

std::string run_info_to_json(const RunInfo& info)
{
    const SimParams& p = info.params;
    json j;
    j["kind"] = "RunInfo";
    j["params"] = {{"n_nodes", p.n_nodes},   {"beta", p.beta},   {"rho", p.rho},
                   {"tau", p.tau},           {"delta_h", p.delta_h}, {"capacity", p.capacity},
                   {"nu", p.nu},             {"c_tilde", p.c_tilde}, {"horizon_slots", p.horizon_slots},
                   {"seed", p.seed}};
    j["honest_nodes"] = info.honest_nodes;
    j["protocol"] = info.protocol;
    j["policy"] = info.policy;
    j["attack"] = info.attack;
    j["k_conf"] = info.k_conf;
    j["k_epf"] = info.k_epf;
    j["excluded_until"] = info.excluded_until;
    return j.dump();
}

RunInfo run_info_from_json(const std::string& line)
{
    json j = json::parse(line);
    if (j.value("kind", "") != "RunInfo")
        throw std::runtime_error("trace does not start with a RunInfo record");
    RunInfo info;
    const json& p = j.at("params");
    info.params.n_nodes = p.at("n_nodes").get<std::uint32_t>();
    info.params.beta = p.at("beta").get<double>();
    info.params.rho = p.at("rho").get<double>();
    info.params.tau = p.at("tau").get<double>();
    info.params.delta_h = p.at("delta_h").get<double>();
    info.params.capacity = p.at("capacity").get<double>();
    info.params.nu = p.at("nu").get<std::int64_t>();
    info.params.c_tilde = p.at("c_tilde").get<double>();
    info.params.horizon_slots = p.at("horizon_slots").get<std::int64_t>();
    info.params.seed = p.at("seed").get<std::uint64_t>();
    info.honest_nodes = j.at("honest_nodes").get<std::uint32_t>();
    info.protocol = j.value("protocol", "PoW");
    info.policy = j.value("policy", "LongestHeaderChain");
    info.attack = j.value("attack", "None");
    info.k_conf = j.value("k_conf", 0);
    info.k_epf = j.value("k_epf", 0);
    info.excluded_until = j.value("excluded_until", -1);
    return info;
}

void write_trace(std::ostream& os, const Trace& t)
{
    os << run_info_to_json(t.info) << '\n';
    for (const auto& e : t.events)
        os << event_to_json(e) << '\n';
}

Trace read_trace(std::istream& is)
{
    Trace t;
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("empty trace");
    t.info = run_info_from_json(line);
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        t.events.push_back(event_from_json(line));
    }
    return t;
}

}  // namespace nakasim
