#include "manet/mobility.h"

#include <expat.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace manet {

FcdParseError::FcdParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      m_line(line)
{
}

namespace {

struct ParserDeleter
{
    void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

std::optional<double>
ParseDouble(const char* s)
{
    const char* end = s + std::strlen(s);
    while (s != end && (*s == ' ' || *s == '\t'))
    {
        ++s;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
    {
        return std::nullopt;
    }
    return v;
}

class FcdReader
{
  public:
    explicit FcdReader(XML_Parser parser) : m_parser(parser) {}

    void Start(const char* name, const char** attrs)
    {
        if (m_failed)
        {
            return;
        }
        ++m_depth;
        std::string_view el(name);
        if (m_depth == 1)
        {
            if (el != "fcd-export")
            {
                Fail("root element must be <fcd-export>, found <" + std::string(el) + ">");
            }
            m_sawRoot = true;
            return;
        }
        if (el == "timestep")
        {
            if (m_depth != 2)
            {
                Fail("<timestep> must be a direct child of <fcd-export>");
                return;
            }
            const char* time = Attr(attrs, "time");
            if (!time)
            {
                Fail("<timestep> without time attribute");
                return;
            }
            auto t = ParseDouble(time);
            if (!t || *t < 0.0)
            {
                Fail("invalid timestep time '" + std::string(time) + "'");
                return;
            }
            SimTime at = Seconds(*t);
            if (m_currentTime && at <= *m_currentTime)
            {
                Fail("timestep times are not strictly increasing");
                return;
            }
            m_currentTime = at;
            m_seenThisStep.clear();
            m_inTimestep = true;
            return;
        }
        if (el == "vehicle")
        {
            if (!m_inTimestep || m_depth != 3)
            {
                Fail("<vehicle> outside of a <timestep>");
                return;
            }
            const char* id = Attr(attrs, "id");
            const char* x = Attr(attrs, "x");
            const char* y = Attr(attrs, "y");
            if (!id)
            {
                Fail("<vehicle> without id");
                return;
            }
            if (!x || !y)
            {
                Fail("vehicle '" + std::string(id) + "' is missing x or y");
                return;
            }
            auto px = ParseDouble(x);
            auto py = ParseDouble(y);
            if (!px || !py)
            {
                Fail("vehicle '" + std::string(id) + "' has a non-numeric coordinate");
                return;
            }
            if (!m_seenThisStep.insert(id).second)
            {
                Fail("vehicle '" + std::string(id) + "' listed twice in one timestep");
                return;
            }
            auto [it, inserted] = m_index.try_emplace(id, m_chains.size());
            if (inserted)
            {
                m_chains.emplace_back();
                m_labels.emplace_back(id);
            }
            m_chains[it->second].push_back({*m_currentTime, Position{*px, *py}});
        }
        // Other elements (persons, containers, ...) are ignored.
    }

    void End(const char* name)
    {
        if (m_failed)
        {
            return;
        }
        if (std::string_view(name) == "timestep" && m_depth == 2)
        {
            m_inTimestep = false;
        }
        --m_depth;
    }

    bool Failed() const { return m_failed; }
    std::size_t ErrorLine() const { return m_errorLine; }
    const std::string& ErrorMessage() const { return m_error; }
    bool SawRoot() const { return m_sawRoot; }

    std::vector<std::vector<Waypoint>> TakeChains() { return std::move(m_chains); }
    std::vector<std::string> TakeLabels() { return std::move(m_labels); }

  private:
    static const char* Attr(const char** attrs, std::string_view key)
    {
        for (std::size_t i = 0; attrs[i]; i += 2)
        {
            if (key == attrs[i])
            {
                return attrs[i + 1];
            }
        }
        return nullptr;
    }

    void Fail(std::string msg)
    {
        m_failed = true;
        m_errorLine = XML_GetCurrentLineNumber(m_parser);
        m_error = std::move(msg);
        XML_StopParser(m_parser, XML_FALSE);
    }

    XML_Parser m_parser;
    int m_depth = 0;
    bool m_sawRoot = false;
    bool m_inTimestep = false;
    bool m_failed = false;
    std::size_t m_errorLine = 0;
    std::string m_error;
    std::optional<SimTime> m_currentTime;
    std::unordered_set<std::string> m_seenThisStep;
    std::unordered_map<std::string, std::size_t> m_index;
    std::vector<std::vector<Waypoint>> m_chains;
    std::vector<std::string> m_labels;
};

} // namespace

MobilitySource
LoadFcdTrace(std::istream& in)
{
    std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate(nullptr));
    if (!parser)
    {
        throw std::runtime_error("cannot allocate XML parser");
    }
    FcdReader reader(parser.get());
    XML_SetUserData(parser.get(), &reader);
    XML_SetElementHandler(
        parser.get(),
        [](void* ud, const XML_Char* name, const XML_Char** attrs) {
            static_cast<FcdReader*>(ud)->Start(name, attrs);
        },
        [](void* ud, const XML_Char* name) { static_cast<FcdReader*>(ud)->End(name); });

    char buf[1 << 16];
    bool done = false;
    while (!done)
    {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        done = got < static_cast<std::streamsize>(sizeof(buf));
        if (XML_Parse(parser.get(), buf, static_cast<int>(got), done) == XML_STATUS_ERROR)
        {
            if (reader.Failed())
            {
                throw FcdParseError(reader.ErrorLine(), reader.ErrorMessage());
            }
            throw FcdParseError(XML_GetCurrentLineNumber(parser.get()),
                                XML_ErrorString(XML_GetErrorCode(parser.get())));
        }
    }
    if (!reader.SawRoot())
    {
        throw FcdParseError(XML_GetCurrentLineNumber(parser.get()), "empty document");
    }
    auto chains = reader.TakeChains();
    if (chains.empty())
    {
        throw FcdParseError(XML_GetCurrentLineNumber(parser.get()), "trace contains no vehicles");
    }
    Arena bounds{0.0, 0.0};
    for (const auto& chain : chains)
    {
        for (const auto& w : chain)
        {
            bounds.width = std::max(bounds.width, w.pos.x);
            bounds.height = std::max(bounds.height, w.pos.y);
        }
    }
    return MobilitySource(MobilitySource::Kind::Trace, bounds, std::move(chains), reader.TakeLabels());
}

} // namespace manet
