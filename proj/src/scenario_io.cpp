#include "boundstab/scenario_io.hpp"

#include "json.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace boundstab
{
    using nlohmann::json;

    namespace
    {
        // Field access with path-qualified errors and unknown-field detection.
        class Fields
        {
        public:
            Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
            {
                if (!j_.is_object())
                {
                    throw ConfigError(where() + ": expected an object");
                }
            }

            const json* optional(const std::string& name)
            {
                used_.insert(name);
                const auto it = j_.find(name);
                return it == j_.end() ? nullptr : &*it;
            }

            const json& required(const std::string& name)
            {
                const json* v = optional(name);
                if (!v)
                {
                    throw ConfigError(at(name) + ": missing field");
                }
                return *v;
            }

            std::int64_t integer(const std::string& name, std::optional<std::int64_t> fallback = std::nullopt)
            {
                const json* v = fallback ? optional(name) : &required(name);
                if (!v)
                {
                    return *fallback;
                }
                if (!v->is_number_integer())
                {
                    throw ConfigError(at(name) + ": expected an integer");
                }
                return v->get<std::int64_t>();
            }

            double number(const std::string& name, double fallback)
            {
                const json* v = optional(name);
                if (!v)
                {
                    return fallback;
                }
                if (!v->is_number())
                {
                    throw ConfigError(at(name) + ": expected a number");
                }
                return v->get<double>();
            }

            std::string text(const std::string& name, std::optional<std::string> fallback = std::nullopt)
            {
                const json* v = fallback ? optional(name) : &required(name);
                if (!v)
                {
                    return *fallback;
                }
                if (!v->is_string())
                {
                    throw ConfigError(at(name) + ": expected a string");
                }
                return v->get<std::string>();
            }

            const json& array(const std::string& name, bool needed)
            {
                static const json empty = json::array();
                const json* v = needed ? &required(name) : optional(name);
                if (!v)
                {
                    return empty;
                }
                if (!v->is_array())
                {
                    throw ConfigError(at(name) + ": expected an array");
                }
                return *v;
            }

            void finish() const
            {
                for (const auto& [key, value] : j_.items())
                {
                    if (!used_.contains(key))
                    {
                        throw ConfigError(at(key) + ": unknown field");
                    }
                }
            }

            std::string at(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }
            std::string where() const { return path_.empty() ? "scenario" : path_; }

        private:
            const json& j_;
            std::string path_;
            std::set<std::string> used_;
        };

        std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

        const std::map<std::string, FaultSpec::Kind>& fault_kinds()
        {
            static const std::map<std::string, FaultSpec::Kind> k{
                {"overwrite_counter", FaultSpec::Kind::OverwriteCounter},
                {"insert_dep", FaultSpec::Kind::InsertDep},
                {"delete_dep", FaultSpec::Kind::DeleteDep},
                {"scramble_var", FaultSpec::Kind::ScrambleVar},
                {"overwrite_stamp", FaultSpec::Kind::OverwriteStamp},
                {"delete_stamp", FaultSpec::Kind::DeleteStamp},
                {"corrupt_process", FaultSpec::Kind::CorruptProcess},
                {"corrupt_all", FaultSpec::Kind::CorruptAll},
            };
            return k;
        }

        FaultSpec parse_fault(const json& j, const std::string& path)
        {
            Fields f(j, path);
            FaultSpec fault;
            const std::string kind = f.text("kind");
            const auto it = fault_kinds().find(kind);
            if (it == fault_kinds().end())
            {
                throw ConfigError(f.at("kind") + ": unknown fault kind '" + kind + "'");
            }
            fault.kind = it->second;
            const std::int64_t step = f.integer("step");
            if (step < 0)
            {
                throw ConfigError(f.at("step") + ": must be >= 0");
            }
            fault.step = static_cast<std::uint64_t>(step);
            fault.process = static_cast<ProcessId>(f.integer("process", 0));
            fault.target = f.text("target", "");
            fault.value = f.integer("value", 0);
            fault.message = static_cast<std::size_t>(f.integer("message", 0));
            fault.stamp = static_cast<int>(f.integer("stamp", 0));
            f.finish();
            return fault;
        }

        json parse_json(const std::string& text, const std::string& what)
        {
            try
            {
                return json::parse(text);
            }
            catch (const json::parse_error& e)
            {
                throw ParseError(what + ": " + e.what());
            }
        }
    } // namespace

    Scenario parse_scenario(const std::string& text)
    {
        const json root = parse_json(text, "scenario");
        Fields top(root, "");
        Scenario s;

        Fields proto(top.required("protocol"), "protocol");
        s.protocol = proto.text("name");
        if (const json* params = proto.optional("params"))
        {
            if (!params->is_object())
            {
                throw ConfigError("protocol.params: expected an object");
            }
            for (const auto& [key, value] : params->items())
            {
                if (!value.is_number_integer())
                {
                    throw ConfigError("protocol.params." + key + ": expected an integer");
                }
                s.params[key] = value.get<std::int64_t>();
            }
        }
        proto.finish();

        Fields topo(top.required("topology"), "topology");
        s.topology.kind = topo.text("kind", "complete");
        s.topology.n = static_cast<int>(topo.integer("n"));
        const json& edges = topo.array("edges", false);
        for (std::size_t i = 0; i < edges.size(); ++i)
        {
            if (!edges[i].is_array() || edges[i].size() != 2 || !edges[i][0].is_number_integer() ||
                !edges[i][1].is_number_integer())
            {
                throw ConfigError(indexed("topology.edges", i) + ": expected [a, b]");
            }
            s.topology.edges.emplace_back(edges[i][0].get<int>(), edges[i][1].get<int>());
        }
        topo.finish();

        s.regions.rs = top.integer("rs", 100);
        s.regions.start_region = top.integer("start_region", 0);
        if (const json* d = top.optional("drift_policy"))
        {
            Fields drift(*d, "drift_policy");
            const std::string kind = drift.text("kind");
            if (kind == "none")
            {
                s.drift.kind = DriftPolicy::Kind::None;
            }
            else if (kind == "bounded_jitter")
            {
                s.drift.kind = DriftPolicy::Kind::BoundedJitter;
            }
            else
            {
                throw ConfigError("drift_policy.kind: unknown drift policy '" + kind + "'");
            }
            s.drift.max_step_skew = drift.integer("max_step_skew", 0);
            drift.finish();
        }

        const json& families = top.array("families", true);
        for (std::size_t i = 0; i < families.size(); ++i)
        {
            Fields f(families[i], indexed("families", i));
            FamilySetting fs;
            fs.name = f.text("name");
            fs.maxinc = f.integer("maxinc");
            if (fs.maxinc < 1)
            {
                throw ConfigError(f.at("maxinc") + ": must be >= 1");
            }
            f.finish();
            s.families.push_back(fs);
        }
        const json& deps = top.array("deps", false);
        for (std::size_t i = 0; i < deps.size(); ++i)
        {
            Fields f(deps[i], indexed("deps", i));
            s.deps.push_back({f.text("name"), f.integer("r_b"), f.integer("r_f")});
            f.finish();
        }

        s.channel_lifetime = top.integer("channel_lifetime", 1);
        s.loss_probability = top.number("loss_probability", 0.0);
        const json& faults = top.array("faults", false);
        for (std::size_t i = 0; i < faults.size(); ++i)
        {
            s.faults.push_back(parse_fault(faults[i], indexed("faults", i)));
        }
        s.run_regions = top.integer("run_regions", 100);
        if (s.run_regions < 0)
        {
            throw ConfigError("run_regions: must be >= 0");
        }
        s.seed = static_cast<std::uint64_t>(top.integer("seed", 1));
        s.steps_per_time_unit = static_cast<int>(top.integer("steps_per_time_unit", 1));
        top.finish();
        return s;
    }

    Scenario load_scenario(const std::filesystem::path& path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ConfigError("cannot read scenario " + path.string());
        }
        std::ostringstream text;
        text << in.rdbuf();
        return parse_scenario(text.str());
    }
} // namespace boundstab

namespace boundstab
{
    namespace
    {
        json counter_json(const CounterSnap& c)
        {
            if (!c.residue)
            {
                return nullptr;
            }
            return json::array({*c.residue, c.lifted ? json(*c.lifted) : json(nullptr), c.created});
        }

        CounterSnap counter_from(const json& j)
        {
            CounterSnap c;
            if (j.is_null())
            {
                return c;
            }
            c.residue = j.at(0).get<std::int64_t>();
            if (!j.at(1).is_null())
            {
                c.lifted = j.at(1).get<Value>();
            }
            c.created = j.at(2).get<Region>();
            return c;
        }

        TraceHeader header_from(const json& j)
        {
            TraceHeader h;
            h.protocol = j.at("protocol").get<std::string>();
            h.seed = j.at("seed").get<std::uint64_t>();
            h.steps = j.at("steps").get<std::uint64_t>();
            h.bounded = j.at("bounded").get<bool>();
            for (const json& f : j.at("families"))
            {
                h.families.push_back(f.at("name").get<std::string>());
                h.family_params.push_back({f.at("maxinc").get<std::int64_t>(), f.at("max_r").get<std::int64_t>()});
            }
            return h;
        }

        TraceRecord record_from(const json& j)
        {
            TraceRecord r;
            r.step = j.at("step").get<std::uint64_t>();
            r.global_region = j.at("region").get<Region>();
            r.actor = j.at("actor").get<ProcessId>();
            r.action = j.at("action").get<int>();
            for (const json& p : j.at("processes"))
            {
                ProcessSnap ps;
                ps.region = p.at("region").get<Region>();
                for (const json& c : p.at("counters"))
                {
                    ps.counters.push_back(counter_from(c));
                }
                ps.vars = p.at("vars").get<std::vector<std::int64_t>>();
                r.processes.push_back(std::move(ps));
            }
            for (const json& m : j.at("messages"))
            {
                MessageSnap ms;
                ms.id = m.at("id").get<std::uint64_t>();
                ms.from = m.at("from").get<ProcessId>();
                ms.to = m.at("to").get<ProcessId>();
                ms.kind = m.at("kind").get<int>();
                ms.sent = m.at("sent").get<Region>();
                ms.fields = m.at("fields").get<std::vector<std::int64_t>>();
                for (const json& s : m.at("stamps"))
                {
                    if (s.is_null())
                    {
                        ms.stamp_kinds.push_back(-1);
                        ms.stamps.emplace_back();
                    }
                    else
                    {
                        ms.stamp_kinds.push_back(s.at(0).get<int>());
                        ms.stamps.push_back(counter_from(json::array({s.at(1), s.at(2), s.at(3)})));
                    }
                }
                r.messages.push_back(std::move(ms));
            }
            for (const json& e : j.at("events"))
            {
                r.events.push_back({e.at(0).get<std::string>(), e.at(1).get<std::vector<std::int64_t>>()});
            }
            return r;
        }
    } // namespace

    std::string header_line(const TraceHeader& header)
    {
        json families = json::array();
        for (std::size_t i = 0; i < header.families.size(); ++i)
        {
            const CounterParams& p = header.family_params[i];
            families.push_back({{"name", header.families[i]},
                                {"maxinc", p.maxinc},
                                {"max_r", p.max_r},
                                {"maxbound", p.maxbound()},
                                {"bits", bits_for_maxbound(p.maxbound())}});
        }
        const json j{{"type", "header"},  {"protocol", header.protocol}, {"seed", header.seed},
                     {"steps", header.steps}, {"bounded", header.bounded},   {"families", families}};
        return j.dump();
    }

    std::string record_line(const TraceRecord& r)
    {
        json processes = json::array();
        for (const ProcessSnap& p : r.processes)
        {
            json counters = json::array();
            for (const CounterSnap& c : p.counters)
            {
                counters.push_back(counter_json(c));
            }
            processes.push_back({{"region", p.region}, {"counters", counters}, {"vars", p.vars}});
        }
        json messages = json::array();
        for (const MessageSnap& m : r.messages)
        {
            json stamps = json::array();
            for (std::size_t i = 0; i < m.stamps.size(); ++i)
            {
                const CounterSnap& c = m.stamps[i];
                if (!c.residue)
                {
                    stamps.push_back(nullptr);
                    continue;
                }
                stamps.push_back(
                    json::array({m.stamp_kinds[i], *c.residue, c.lifted ? json(*c.lifted) : json(nullptr), c.created}));
            }
            messages.push_back({{"id", m.id},
                                {"from", m.from},
                                {"to", m.to},
                                {"kind", m.kind},
                                {"sent", m.sent},
                                {"fields", m.fields},
                                {"stamps", stamps}});
        }
        json events = json::array();
        for (const Event& e : r.events)
        {
            events.push_back(json::array({e.name, e.args}));
        }
        const json j{{"type", "step"},        {"step", r.step},         {"region", r.global_region},
                     {"actor", r.actor},      {"action", r.action},     {"processes", processes},
                     {"messages", messages},  {"events", events}};
        return j.dump();
    }

    void write_trace(std::ostream& out, const Trace& trace)
    {
        out << header_line(trace.header) << '\n';
        for (const TraceRecord& r : trace.records)
        {
            out << record_line(r) << '\n';
        }
    }

    Trace read_trace(std::istream& in)
    {
        Trace trace;
        std::string line;
        std::size_t number = 0;
        bool have_header = false;
        while (std::getline(in, line))
        {
            ++number;
            if (line.empty())
            {
                continue;
            }
            const std::string where = "trace line " + std::to_string(number);
            const json j = parse_json(line, where);
            try
            {
                const std::string type = j.at("type").get<std::string>();
                if (type == "header" && !have_header)
                {
                    trace.header = header_from(j);
                    have_header = true;
                }
                else if (type == "step" && have_header)
                {
                    trace.records.push_back(record_from(j));
                }
                else
                {
                    throw ParseError(where + ": unexpected " + type + " line");
                }
            }
            catch (const json::exception& e)
            {
                throw ParseError(where + ": " + e.what());
            }
        }
        if (!have_header)
        {
            throw ParseError("trace has no header");
        }
        if (trace.records.size() != trace.header.steps)
        {
            throw ParseError("trace truncated: header announces " + std::to_string(trace.header.steps) +
                             " steps, found " + std::to_string(trace.records.size()));
        }
        return trace;
    }

    Trace load_trace(const std::filesystem::path& path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ParseError("cannot read trace " + path.string());
        }
        return read_trace(in);
    }

    SweepGrid parse_grid(const std::string& text)
    {
        const json root = parse_json(text, "grid");
        Fields f(root, "");
        SweepGrid g;
        g.rs = f.integer("rs", 100);
        for (const char* name : {"delays", "rates"})
        {
            const json& a = f.array(name, true);
            auto& out = std::string(name) == "delays" ? g.delays : g.rates;
            for (std::size_t i = 0; i < a.size(); ++i)
            {
                if (!a[i].is_number_integer())
                {
                    throw ConfigError(indexed(name, i) + ": expected an integer");
                }
                out.push_back(a[i].get<std::int64_t>());
            }
        }
        g.multiplier = f.integer("multiplier", 1);
        g.extra = f.integer("extra", 0);
        f.finish();
        if (g.rs <= 0)
        {
            throw ConfigError("rs: must be > 0");
        }
        return g;
    }
} // namespace boundstab
