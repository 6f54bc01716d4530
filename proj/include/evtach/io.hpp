#pragma once

#include <string>
#include <string_view>

#include "evtach/event.hpp"

namespace evtach {

/// Stream file formats.
///
/// Text ("ee3p-csv v1"): one header line `ee3p-csv v1 <width> <height>`,
/// then one event per line as `x,y,t,p` with decimal integers and
/// p in {-1, 1}.
///
/// Binary ("EE3P"): magic `EE3P`, u8 version = 1, u16 width, u16 height,
/// u64 event count (all little-endian), then 13 bytes per event:
/// u16 x, u16 y, u64 t, i8 p. Total size is exactly 17 + 13 * count.
enum class Format {
    auto_detect, // keyed on the 4-byte magic vs. the text header
    text,
    binary,
};

/// Decodes a stream from raw bytes. The returned stream always passes
/// validate_stream; any violation in the input is a FormatError that
/// names the offending record.
EventStream read_stream_bytes(std::string_view bytes, Format format = Format::auto_detect);

/// Reads and decodes a stream file. IoError if the file cannot be read.
EventStream read_stream(const std::string& path, Format format = Format::auto_detect);

/// Encodes a stream. Round trip through read_stream_bytes is bit-exact
/// for both formats. FormatError if the geometry does not fit the binary
/// u16 fields. `format` must not be auto_detect.
std::string write_stream(const EventStream& stream, Format format);

void write_stream_file(const EventStream& stream, const std::string& path, Format format);

Format parse_format(const std::string& name); // "auto" | "text" | "binary"

} // namespace evtach
