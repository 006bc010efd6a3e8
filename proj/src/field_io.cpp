#include "sflab/field_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "sflab/clifford.hpp"
#include "sflab/error.hpp"
#include "sflab/hash.hpp"

namespace sflab {

namespace {

static_assert(std::endian::native == std::endian::little, "field container assumes little endian");

constexpr char kMagic[8] = {'S', 'F', 'L', 'F', 'I', 'E', 'L', 'D'};
constexpr std::uint64_t kMaxHeader = 1u << 20;

std::span<const unsigned char> bytes_of(const std::vector<Complex>& v) {
  return {reinterpret_cast<const unsigned char*>(v.data()), v.size() * sizeof(Complex)};
}

void write_container(std::ostream& os, nlohmann::json header, const std::vector<Complex>& payload,
                     const FieldMetadata& meta) {
  const auto raw = bytes_of(payload);
  header["profile"] = {{"radius", meta.profile_radius}, {"steepness", meta.profile_steepness}};
  header["k"] = meta.k ? nlohmann::json(*meta.k) : nlohmann::json(nullptr);
  header["convention"] = meta.convention.empty() ? convention_tag() : meta.convention;
  header["payload_bytes"] = raw.size();
  header["payload_sha256"] = sha256_hex(raw);
  const std::string text = header.dump();
  const std::uint32_t version = kFieldFormatVersion;
  const std::uint64_t len = text.size();
  os.write(kMagic, sizeof kMagic);
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw Error("field container: write failed");
}

struct Container {
  nlohmann::json header;
  std::vector<Complex> payload;
};

Container read_container(std::istream& is, const std::string& kind, FieldMetadata* meta) {
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError("field container: bad magic");
  }
  if (!is.read(reinterpret_cast<char*>(&version), sizeof version)) throw FormatError("field container: truncated");
  if (version != kFieldFormatVersion) {
    throw FormatError("field container: unsupported version " + std::to_string(version));
  }
  if (!is.read(reinterpret_cast<char*>(&len), sizeof len) || len > kMaxHeader) {
    throw FormatError("field container: bad header length");
  }
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw FormatError("field container: truncated header");
  Container c;
  try {
    c.header = nlohmann::json::parse(text);
    if (c.header.at("kind").get<std::string>() != kind) {
      throw FormatError("field container: expected " + kind + ", found " + c.header.at("kind").get<std::string>());
    }
    const auto bytes = c.header.at("payload_bytes").get<std::uint64_t>();
    if (bytes % sizeof(Complex) != 0) throw FormatError("field container: payload size not a multiple of 16");
    c.payload.resize(bytes / sizeof(Complex));
    if (!is.read(reinterpret_cast<char*>(c.payload.data()), static_cast<std::streamsize>(bytes))) {
      throw FormatError("field container: truncated payload");
    }
    if (sha256_hex(bytes_of(c.payload)) != c.header.at("payload_sha256").get<std::string>()) {
      throw FormatError("field container: payload checksum mismatch");
    }
    if (meta) {
      meta->k = c.header.at("k").is_null() ? std::nullopt : std::optional<int>(c.header.at("k").get<int>());
      meta->profile_radius = c.header.at("profile").at("radius").get<double>();
      meta->profile_steepness = c.header.at("profile").at("steepness").get<double>();
      meta->convention = c.header.at("convention").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field container: malformed header: ") + e.what());
  }
  return c;
}

}  // namespace

void write_field(std::ostream& os, const UnitaryField& field, const FieldMetadata& meta) {
  write_container(os, {{"kind", "unitary_field"}, {"n", field.n()}, {"rank", field.rank()}, {"components", 1}},
                  field.data(), meta);
}

void write_field(std::ostream& os, const ConnectionForm& form, const FieldMetadata& meta) {
  std::vector<Complex> payload;
  for (int j = 0; j < 3; ++j) {
    payload.insert(payload.end(), form.component(j).begin(), form.component(j).end());
  }
  write_container(os, {{"kind", "connection_form"}, {"n", form.n()}, {"rank", form.rank()}, {"components", 3}},
                  payload, meta);
}

UnitaryField read_unitary_field(std::istream& is, FieldMetadata* meta) {
  Container c = read_container(is, "unitary_field", meta);
  const int n = c.header.at("n").get<int>();
  const int rank = c.header.at("rank").get<int>();
  return UnitaryField(n, rank, std::move(c.payload));
}

ConnectionForm read_connection_form(std::istream& is, FieldMetadata* meta) {
  Container c = read_container(is, "connection_form", meta);
  const int n = c.header.at("n").get<int>();
  const int rank = c.header.at("rank").get<int>();
  const std::size_t per = static_cast<std::size_t>(n) * n * n * rank * rank;
  if (c.payload.size() != 3 * per) throw FormatError("field container: payload does not match n and rank");
  std::array<std::vector<Complex>, 3> comps;
  for (std::size_t j = 0; j < 3; ++j) {
    comps[j].assign(c.payload.begin() + static_cast<std::ptrdiff_t>(j * per),
                    c.payload.begin() + static_cast<std::ptrdiff_t>((j + 1) * per));
  }
  return ConnectionForm(n, rank, std::move(comps));
}

}  // namespace sflab
