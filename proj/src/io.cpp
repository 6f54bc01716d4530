#include "evtach/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>

#include "evtach/errors.hpp"

namespace evtach {

namespace {

constexpr char kBinaryMagic[4] = {'E', 'E', '3', 'P'};
constexpr std::uint8_t kBinaryVersion = 1;
constexpr std::size_t kBinaryHeaderSize = 17;
// u16 x + u16 y + u64 t + i8 p
constexpr std::size_t kBinaryRecordSize = 13;
constexpr std::string_view kTextSignature = "ee3p-csv v1 ";

std::uint16_t load_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (std::uint16_t{p[1]} << 8));
}

std::uint64_t load_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

void store_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void store_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(v & 0xff));
        v >>= 8;
    }
}

template <typename Int>
bool parse_int(std::string_view field, Int& out) {
    if (field.empty()) {
        return false;
    }
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+') {
        ++first; // from_chars rejects an explicit plus sign
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

[[noreturn]] void record_error(std::size_t record, const std::string& what) {
    throw FormatError("record " + std::to_string(record) + ": " + what);
}

EventStream read_text(std::string_view bytes) {
    std::size_t line_end = bytes.find('\n');
    std::string_view header = bytes.substr(0, line_end == std::string_view::npos ? bytes.size() : line_end);
    if (header.substr(0, kTextSignature.size()) != kTextSignature) {
        throw FormatError("malformed header: expected \"ee3p-csv v1 <width> <height>\"");
    }

    std::string_view dims = header.substr(kTextSignature.size());
    std::size_t space = dims.find(' ');
    EventStream stream;
    if (space == std::string_view::npos ||
        !parse_int(dims.substr(0, space), stream.geometry.width) ||
        !parse_int(dims.substr(space + 1), stream.geometry.height) ||
        !stream.geometry.valid()) {
        throw FormatError("malformed header: bad sensor dimensions");
    }

    std::size_t pos = line_end == std::string_view::npos ? bytes.size() : line_end + 1;
    std::size_t record = 0;
    std::uint64_t prev_t = 0;
    while (pos < bytes.size()) {
        std::size_t eol = bytes.find('\n', pos);
        std::string_view line = bytes.substr(pos, (eol == std::string_view::npos ? bytes.size() : eol) - pos);
        pos = eol == std::string_view::npos ? bytes.size() : eol + 1;
        if (line.empty() && pos >= bytes.size()) {
            break; // trailing newline
        }
        ++record;

        std::string_view fields[4];
        std::size_t start = 0;
        int n = 0;
        for (; n < 4; ++n) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string_view::npos) {
                fields[n] = line.substr(start);
                ++n;
                break;
            }
            fields[n] = line.substr(start, comma - start);
            start = comma + 1;
        }
        if (n != 4 || line.find(',', start) != std::string_view::npos) {
            record_error(record, "expected four fields x,y,t,p");
        }

        Event e;
        int polarity = 0;
        if (!parse_int(fields[0], e.x)) {
            record_error(record, "bad x coordinate");
        }
        if (!parse_int(fields[1], e.y)) {
            record_error(record, "bad y coordinate");
        }
        if (!parse_int(fields[2], e.t)) {
            record_error(record, "bad timestamp");
        }
        if (!parse_int(fields[3], polarity)) {
            record_error(record, "bad polarity");
        }
        if (polarity != -1 && polarity != 1) {
            record_error(record, "polarity outside {-1, 1}");
        }
        e.p = static_cast<std::int8_t>(polarity);
        if (e.x >= stream.geometry.width || e.y >= stream.geometry.height) {
            record_error(record, "coordinates outside sensor geometry");
        }
        if (record > 1 && e.t < prev_t) {
            record_error(record, "timestamp regression");
        }
        prev_t = e.t;
        stream.events.push_back(e);
    }
    return stream;
}

EventStream read_binary(std::string_view bytes) {
    if (bytes.size() < kBinaryHeaderSize) {
        throw FormatError("truncated binary header");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kBinaryMagic, 4) != 0) {
        throw FormatError("bad magic, not an EE3P binary stream");
    }
    if (p[4] != kBinaryVersion) {
        throw FormatError("unsupported binary version " + std::to_string(p[4]));
    }

    EventStream stream;
    stream.geometry.width = load_u16(p + 5);
    stream.geometry.height = load_u16(p + 7);
    if (!stream.geometry.valid()) {
        throw FormatError("malformed header: bad sensor dimensions");
    }
    const std::uint64_t count = load_u64(p + 9);
    const std::uint64_t payload = bytes.size() - kBinaryHeaderSize;
    if (count > payload / kBinaryRecordSize) {
        throw FormatError("truncated binary payload: header claims " + std::to_string(count) +
                          " events");
    }
    if (payload > count * kBinaryRecordSize) {
        throw FormatError("trailing bytes after binary payload");
    }

    stream.events.resize(static_cast<std::size_t>(count));
    const unsigned char* rec = p + kBinaryHeaderSize;
    std::uint64_t prev_t = 0;
    for (std::uint64_t i = 0; i < count; ++i, rec += kBinaryRecordSize) {
        Event& e = stream.events[static_cast<std::size_t>(i)];
        e.x = load_u16(rec);
        e.y = load_u16(rec + 2);
        e.t = load_u64(rec + 4);
        e.p = static_cast<std::int8_t>(rec[12]);
        if (e.p != -1 && e.p != 1) {
            record_error(static_cast<std::size_t>(i + 1), "polarity outside {-1, 1}");
        }
        if (e.x >= stream.geometry.width || e.y >= stream.geometry.height) {
            record_error(static_cast<std::size_t>(i + 1), "coordinates outside sensor geometry");
        }
        if (i > 0 && e.t < prev_t) {
            record_error(static_cast<std::size_t>(i + 1), "timestamp regression");
        }
        prev_t = e.t;
    }
    return stream;
}

std::string write_text(const EventStream& stream) {
    std::string out;
    out.reserve(24 + stream.events.size() * 24);
    out += "ee3p-csv v1 ";
    out += std::to_string(stream.geometry.width);
    out += ' ';
    out += std::to_string(stream.geometry.height);
    out += '\n';
    char buf[64];
    for (const Event& e : stream.events) {
        int len = std::snprintf(buf, sizeof buf, "%u,%u,%llu,%d\n", e.x, e.y,
                                static_cast<unsigned long long>(e.t), int(e.p));
        out.append(buf, static_cast<std::size_t>(len));
    }
    return out;
}

std::string write_binary(const EventStream& stream) {
    if (stream.geometry.width > std::numeric_limits<std::uint16_t>::max() ||
        stream.geometry.height > std::numeric_limits<std::uint16_t>::max()) {
        throw FormatError("sensor geometry exceeds the u16 range of the binary format");
    }
    std::string out;
    out.reserve(kBinaryHeaderSize + stream.events.size() * kBinaryRecordSize);
    out.append(kBinaryMagic, 4);
    out.push_back(static_cast<char>(kBinaryVersion));
    store_u16(out, static_cast<std::uint16_t>(stream.geometry.width));
    store_u16(out, static_cast<std::uint16_t>(stream.geometry.height));
    store_u64(out, stream.events.size());
    for (const Event& e : stream.events) {
        store_u16(out, static_cast<std::uint16_t>(e.x));
        store_u16(out, static_cast<std::uint16_t>(e.y));
        store_u64(out, e.t);
        out.push_back(static_cast<char>(e.p));
    }
    return out;
}

} // namespace

EventStream read_stream_bytes(std::string_view bytes, Format format) {
    if (format == Format::auto_detect) {
        format = bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0
                     ? Format::binary
                     : Format::text;
    }
    return format == Format::binary ? read_binary(bytes) : read_text(bytes);
}

EventStream read_stream(const std::string& path, Format format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failure on " + path);
    }
    return read_stream_bytes(bytes, format);
}

std::string write_stream(const EventStream& stream, Format format) {
    switch (format) {
    case Format::text: return write_text(stream);
    case Format::binary: return write_binary(stream);
    case Format::auto_detect: break;
    }
    throw ConfigError("write_stream requires an explicit format");
}

void write_stream_file(const EventStream& stream, const std::string& path, Format format) {
    const std::string bytes = write_stream(stream, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failure on " + path);
    }
}

Format parse_format(const std::string& name) {
    if (name == "auto") return Format::auto_detect;
    if (name == "text") return Format::text;
    if (name == "binary") return Format::binary;
    throw ConfigError("format: expected auto, text or binary, got \"" + name + "\"");
}

} // namespace evtach
