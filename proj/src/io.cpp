#include "rumble/io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rumble/errors.hpp"

namespace rumble::io {

namespace {

using nlohmann::json;

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ifstream open_input(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream f(path, mode);
    if (!f) throw IoError("cannot open " + path + " for reading");
    return f;
}

std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw IoError("cannot open " + path + " for writing");
    return f;
}

void finish_write(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw IoError("write to " + path + " failed");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(const std::string& field, const std::string& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used])))
            ++used;
        if (used != field.size()) throw DataError("");
        return v;
    } catch (const DataError&) {
        throw DataError("bad numeric field '" + field + "' in " + path);
    } catch (const std::exception&) {
        throw DataError("bad numeric field '" + field + "' in " + path);
    }
}

/// Strips a trailing carriage return so CRLF files parse too.
bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

Unit unit_from_name(const std::string& name) {
    for (Unit u : {Unit::GroundVelocity, Unit::Volts, Unit::AdcCode, Unit::Dimensionless})
        if (unit_name(u) == name) return u;
    throw DataError("unknown unit column '" + name + "'");
}

// little-endian scalar helpers for the binary formats
void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct ByteReader {
    const std::string& bytes;
    const std::string& path;
    std::size_t at = 0;

    void need(std::size_t n) const {
        if (at + n > bytes.size()) throw DataError("truncated file " + path);
    }
    std::uint16_t u16() {
        need(2);
        const auto b0 = static_cast<std::uint8_t>(bytes[at]);
        const auto b1 = static_cast<std::uint8_t>(bytes[at + 1]);
        at += 2;
        return static_cast<std::uint16_t>(b0 | (b1 << 8));
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[at + i])) << (8 * i);
        at += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[at + i])) << (8 * i);
        at += 8;
        double v = 0.0;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::string tag() {
        need(4);
        std::string t = bytes.substr(at, 4);
        at += 4;
        return t;
    }
};

std::string read_all_bytes(const std::string& path) {
    auto f = open_input(path, std::ios::in | std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_all_bytes(const std::string& path, const std::string& bytes) {
    auto f = open_output(path, std::ios::out | std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    finish_write(f, path);
}

std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

void write_sidecar(const std::string& path, const dsp::Spectrogram& s) {
    json meta;
    meta["scale"] = s.scale == dsp::Scale::Decibel ? "decibel" : "power";
    meta["frame_len"] = s.frame_len;
    meta["hop"] = s.hop;
    write_text_file(sidecar_path(path), meta.dump(2) + "\n");
}

void apply_sidecar(const std::string& path, dsp::Spectrogram& s) {
    std::ifstream f(sidecar_path(path));
    if (!f) return;  // older files carry no metadata; defaults stand
    std::ostringstream buf;
    buf << f.rdbuf();
    try {
        const json meta = json::parse(buf.str());
        const std::string scale = meta.at("scale").get<std::string>();
        if (scale == "decibel")
            s.scale = dsp::Scale::Decibel;
        else if (scale == "power")
            s.scale = dsp::Scale::Power;
        else
            throw DataError("unknown scale '" + scale + "' in " + sidecar_path(path));
        s.frame_len = meta.at("frame_len").get<std::size_t>();
        s.hop = meta.at("hop").get<std::size_t>();
    } catch (const json::exception& e) {
        throw DataError("bad sidecar " + sidecar_path(path) + ": " + e.what());
    }
}

constexpr std::size_t kMaxCells = 1u << 28;  // refuse absurd allocations from corrupt headers

}  // namespace

std::string read_text_file(const std::string& path) { return read_all_bytes(path); }

void write_text_file(const std::string& path, const std::string& content) {
    write_all_bytes(path, content);
}

void write_timeseries_csv(const std::string& path, const TimeSeries& x) {
    x.validate();
    std::string out = "time_s," + unit_name(x.unit) + "\n";
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        out += g17(static_cast<double>(i) / x.sample_rate);
        out += ',';
        out += g17(x.samples[i]);
        out += '\n';
    }
    write_all_bytes(path, out);
}

TimeSeries read_timeseries_csv(const std::string& path) {
    auto f = open_input(path);
    std::string line;
    if (!next_line(f, line)) throw DataError("empty file " + path);
    const auto header = split_csv(line);
    if (header.size() != 2 || header[0] != "time_s")
        throw DataError("expected header 'time_s,<unit>' in " + path);

    TimeSeries x;
    x.unit = unit_from_name(header[1]);
    std::vector<double> times;
    while (next_line(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2) throw DataError("expected two columns in " + path);
        times.push_back(parse_double(fields[0], path));
        x.samples.push_back(parse_double(fields[1], path));
    }
    if (times.size() < 2) throw DataError("need at least two samples to infer a rate in " + path);
    const double span = times.back() - times.front();
    if (!(span > 0.0)) throw DataError("time column must increase in " + path);
    x.sample_rate = static_cast<double>(times.size() - 1) / span;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double expected = times.front() + static_cast<double>(i) / x.sample_rate;
        if (std::abs(times[i] - expected) > 0.25 / x.sample_rate)
            throw DataError("non-uniform sampling in " + path);
    }
    x.validate();
    return x;
}

void write_wav_pcm16(const std::string& path, const TimeSeries& codes) {
    codes.validate();
    if (codes.unit != Unit::AdcCode)
        throw UnitError("WAV export expects adc_code data, got " + unit_name(codes.unit));
    const double rate = codes.sample_rate;
    if (std::abs(rate - std::round(rate)) > 1e-9 || rate <= 0.0 || rate > 4294967295.0)
        throw ConfigError("WAV needs an integral sample rate");

    std::string data;
    data.reserve(codes.size() * 2);
    for (double c : codes.samples) {
        if (c < 0.0 || c > 65535.0) throw RangeError("ADC code outside [0, 65535]");
        if (c != std::floor(c)) throw DataError("ADC codes must be integers");
        const auto centered = static_cast<std::int32_t>(c) - 32768;
        put_u16(data, static_cast<std::uint16_t>(static_cast<std::int16_t>(centered)));
    }

    const auto rate_u = static_cast<std::uint32_t>(std::llround(rate));
    std::string out = "RIFF";
    put_u32(out, static_cast<std::uint32_t>(36 + data.size()));
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, rate_u);
    put_u32(out, rate_u * 2);  // byte rate
    put_u16(out, 2);           // block align
    put_u16(out, 16);          // bits per sample
    out += "data";
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    out += data;
    write_all_bytes(path, out);
}

TimeSeries read_wav_pcm16(const std::string& path) {
    const std::string bytes = read_all_bytes(path);
    ByteReader r{bytes, path};
    if (r.tag() != "RIFF") throw DataError("not a WAV file: " + path);
    r.u32();  // declared size, unused
    if (r.tag() != "WAVE") throw DataError("not a WAV file: " + path);

    bool have_fmt = false;
    std::uint32_t rate = 0;
    std::string data;
    while (r.at + 8 <= bytes.size()) {
        const std::string id = r.tag();
        const std::uint32_t size = r.u32();
        r.need(size);
        if (id == "fmt ") {
            if (size < 16) throw DataError("short fmt chunk in " + path);
            ByteReader fr{bytes, path};
            fr.at = r.at;
            const auto format = fr.u16();
            const auto channels = fr.u16();
            rate = fr.u32();
            fr.u32();  // byte rate
            fr.u16();  // block align
            const auto bits = fr.u16();
            if (format != 1 || channels != 1 || bits != 16)
                throw DataError("only 16-bit mono PCM is supported: " + path);
            have_fmt = true;
        } else if (id == "data") {
            data = bytes.substr(r.at, size);
        }
        r.at += size + (size % 2);  // chunks are word aligned
    }
    if (!have_fmt || rate == 0) throw DataError("missing fmt chunk in " + path);
    if (data.size() % 2 != 0) throw DataError("odd PCM payload in " + path);

    TimeSeries x;
    x.unit = Unit::AdcCode;
    x.sample_rate = static_cast<double>(rate);
    x.samples.reserve(data.size() / 2);
    for (std::size_t i = 0; i + 1 < data.size(); i += 2) {
        const auto lo = static_cast<std::uint8_t>(data[i]);
        const auto hi = static_cast<std::uint8_t>(data[i + 1]);
        const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        x.samples.push_back(static_cast<double>(static_cast<std::int32_t>(raw) + 32768));
    }
    return x;
}

void write_spectrogram_spg1(const std::string& path, const dsp::Spectrogram& s) {
    std::string out = "SPG1";
    put_u32(out, static_cast<std::uint32_t>(s.n_frames()));
    put_u32(out, static_cast<std::uint32_t>(s.n_bins()));
    for (std::size_t r = 0; r < s.n_frames(); ++r)
        for (std::size_t c = 0; c < s.n_bins(); ++c) put_f64(out, s.values(r, c));
    if (s.frame_times.size() != s.n_frames() || s.bin_freqs.size() != s.n_bins())
        throw SizeError("spectrogram axes do not match its matrix");
    for (double t : s.frame_times) put_f64(out, t);
    for (double f : s.bin_freqs) put_f64(out, f);
    write_all_bytes(path, out);
    write_sidecar(path, s);
}

dsp::Spectrogram read_spectrogram_spg1(const std::string& path) {
    const std::string bytes = read_all_bytes(path);
    ByteReader r{bytes, path};
    if (r.tag() != "SPG1") throw DataError("not an SPG1 file: " + path);
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (static_cast<std::size_t>(rows) * cols > kMaxCells)
        throw DataError("implausible spectrogram size in " + path);

    dsp::Spectrogram s;
    s.values = Matrix(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j) s.values(i, j) = r.f64();
    s.frame_times.resize(rows);
    for (auto& t : s.frame_times) t = r.f64();
    s.bin_freqs.resize(cols);
    for (auto& f : s.bin_freqs) f = r.f64();
    if (r.at != bytes.size()) throw DataError("trailing bytes in " + path);
    apply_sidecar(path, s);
    return s;
}

void write_spectrogram_csv(const std::string& path, const dsp::Spectrogram& s) {
    if (s.frame_times.size() != s.n_frames() || s.bin_freqs.size() != s.n_bins())
        throw SizeError("spectrogram axes do not match its matrix");
    std::string out = "time_s";
    for (double f : s.bin_freqs) {
        out += ',';
        out += g17(f);
    }
    out += '\n';
    for (std::size_t r = 0; r < s.n_frames(); ++r) {
        out += g17(s.frame_times[r]);
        for (std::size_t c = 0; c < s.n_bins(); ++c) {
            out += ',';
            out += g17(s.values(r, c));
        }
        out += '\n';
    }
    write_all_bytes(path, out);
    write_sidecar(path, s);
}

dsp::Spectrogram read_spectrogram_csv(const std::string& path) {
    auto f = open_input(path);
    std::string line;
    if (!next_line(f, line)) throw DataError("empty file " + path);
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "time_s")
        throw DataError("expected header 'time_s,<bin>...' in " + path);

    dsp::Spectrogram s;
    for (std::size_t i = 1; i < header.size(); ++i)
        s.bin_freqs.push_back(parse_double(header[i], path));

    std::vector<std::vector<double>> rows;
    while (next_line(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw DataError("ragged spectrogram row in " + path);
        s.frame_times.push_back(parse_double(fields[0], path));
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i)
            row.push_back(parse_double(fields[i], path));
        rows.push_back(std::move(row));
    }
    s.values = Matrix(rows.size(), s.bin_freqs.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < s.bin_freqs.size(); ++c) s.values(r, c) = rows[r][c];
    apply_sidecar(path, s);
    return s;
}

void write_features_csv(const std::string& path,
                        const std::vector<features::FeatureVector>& rows) {
    if (rows.empty()) throw DataError("no feature rows to write");
    const auto kind = rows.front().kind;
    const std::size_t dim = rows.front().values.size();
    std::string out = "kind,source_id,label";
    for (std::size_t i = 0; i < dim; ++i) out += ",v" + std::to_string(i);
    out += '\n';
    for (const auto& row : rows) {
        row.validate();
        if (row.kind != kind || row.values.size() != dim)
            throw DataError("feature rows mix kinds or dimensions");
        if (row.source_id.find_first_of(",\n\r") != std::string::npos)
            throw DataError("source id contains a delimiter: " + row.source_id);
        out += features::kind_name(row.kind);
        out += ',';
        out += row.source_id;
        out += ',';
        out += features::label_name(row.label);
        for (double v : row.values) {
            out += ',';
            out += g17(v);
        }
        out += '\n';
    }
    write_all_bytes(path, out);
}

std::vector<features::FeatureVector> read_features_csv(const std::string& path) {
    auto f = open_input(path);
    std::string line;
    if (!next_line(f, line)) throw DataError("empty file " + path);
    const auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "kind" || header[1] != "source_id" ||
        header[2] != "label")
        throw DataError("expected header 'kind,source_id,label,v0...' in " + path);
    for (std::size_t i = 3; i < header.size(); ++i)
        if (header[i] != "v" + std::to_string(i - 3))
            throw DataError("unexpected value column '" + header[i] + "' in " + path);

    std::vector<features::FeatureVector> rows;
    while (next_line(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) throw DataError("ragged feature row in " + path);
        features::FeatureVector v;
        v.kind = features::kind_from_name(fields[0]);
        v.source_id = fields[1];
        v.label = features::label_from_name(fields[2]);
        for (std::size_t i = 3; i < fields.size(); ++i)
            v.values.push_back(parse_double(fields[i], path));
        v.validate();
        rows.push_back(std::move(v));
    }
    if (rows.empty()) throw DataError("no feature rows in " + path);
    return rows;
}

void write_model_json(const std::string& path, const classify::Model& model) {
    json j;
    if (const auto* linear = std::get_if<classify::LinearModel>(&model)) {
        j["kind"] = classify::linear_kind_name(linear->kind);
        j["weights"] = linear->weights;
        j["bias"] = linear->bias;
        j["hyperparams"] = linear->hyperparams;
        j["standardization"] = {{"means", linear->standardization.means},
                                {"stds", linear->standardization.stds}};
    } else {
        const auto& tree = std::get<classify::TreeModel>(model);
        j["kind"] = "tree";
        j["max_depth"] = tree.max_depth;
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"leaf", features::label_name(n.leaf)}});
        }
        j["nodes"] = std::move(nodes);
    }
    write_all_bytes(path, j.dump(2) + "\n");
}

classify::Model read_model_json(const std::string& path) {
    const std::string text = read_all_bytes(path);
    try {
        const json j = json::parse(text);
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "tree") {
            classify::TreeModel tree;
            tree.max_depth = j.at("max_depth").get<std::size_t>();
            for (const auto& n : j.at("nodes")) {
                classify::TreeNode node;
                node.feature = n.at("feature").get<int>();
                node.threshold = n.at("threshold").get<double>();
                node.left = n.at("left").get<int>();
                node.right = n.at("right").get<int>();
                node.leaf = features::label_from_name(n.at("leaf").get<std::string>());
                tree.nodes.push_back(node);
            }
            if (tree.nodes.empty()) throw DataError("tree model without nodes in " + path);
            for (const auto& n : tree.nodes) {
                if (n.is_leaf()) continue;
                if (n.left < 0 || n.right < 0 ||
                    static_cast<std::size_t>(n.left) >= tree.nodes.size() ||
                    static_cast<std::size_t>(n.right) >= tree.nodes.size())
                    throw DataError("tree node points outside the node array in " + path);
            }
            return classify::Model(std::move(tree));
        }
        classify::LinearModel m;
        m.kind = classify::linear_kind_from_name(kind);
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.hyperparams = j.at("hyperparams").get<std::map<std::string, double>>();
        m.standardization.means =
            j.at("standardization").at("means").get<std::vector<double>>();
        m.standardization.stds = j.at("standardization").at("stds").get<std::vector<double>>();
        if (m.weights.size() != m.standardization.means.size() ||
            m.weights.size() != m.standardization.stds.size())
            throw DataError("model arrays disagree on dimension in " + path);
        auto finite = [](const std::vector<double>& v) {
            for (double x : v)
                if (!std::isfinite(x)) return false;
            return true;
        };
        if (!finite(m.weights) || !finite(m.standardization.means) ||
            !finite(m.standardization.stds) || !std::isfinite(m.bias))
            throw DataError("non-finite model parameters in " + path);
        return classify::Model(std::move(m));
    } catch (const json::exception& e) {
        throw DataError("bad model file " + path + ": " + e.what());
    }
}

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_png_chunk(std::string& out, const char type[5], const std::string& payload) {
    put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
    std::string body = type + payload;
    out += body;
    const auto crc = crc32(crc32(0L, nullptr, 0),
                           reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_matrix_png(const std::string& path, const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw SizeError("cannot render an empty matrix");
    double lo = m(0, 0), hi = m(0, 0);
    for (double v : m.values()) {
        if (!std::isfinite(v)) throw DataError("matrix contains non-finite values");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;

    std::string raw;
    raw.reserve(m.rows() * (m.cols() + 1));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        raw.push_back('\0');  // per-scanline filter byte: none
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double v = span > 0.0 ? (m(r, c) - lo) / span : 0.0;
            raw.push_back(static_cast<char>(static_cast<unsigned char>(std::llround(v * 255.0))));
        }
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(compressed_size, '\0');
    const int rc = compress2(reinterpret_cast<Bytef*>(compressed.data()), &compressed_size,
                             reinterpret_cast<const Bytef*>(raw.data()),
                             static_cast<uLong>(raw.size()), 9);
    if (rc != Z_OK) throw NumericError("zlib compression failed");
    compressed.resize(compressed_size);

    std::string ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(m.cols()));
    put_u32_be(ihdr, static_cast<std::uint32_t>(m.rows()));
    ihdr.push_back('\x08');  // bit depth
    ihdr.push_back('\0');    // grayscale
    ihdr.push_back('\0');    // deflate
    ihdr.push_back('\0');    // adaptive filtering
    ihdr.push_back('\0');    // no interlace

    std::string out("\x89PNG\r\n\x1a\n", 8);
    append_png_chunk(out, "IHDR", ihdr);
    append_png_chunk(out, "IDAT", compressed);
    append_png_chunk(out, "IEND", "");
    write_all_bytes(path, out);
}

}  // namespace rumble::io
