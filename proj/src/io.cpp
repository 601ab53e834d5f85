#include "ksumforge/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace ksumforge {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return lines;
}

template <class T>
T parse_number(std::string_view s, int base, const char* what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw FormatError(std::string("instance: malformed ") + what + " '" + std::string(s) + "'");
    return value;
}

std::vector<std::string_view> split_words(std::string_view line) {
    std::vector<std::string_view> words;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        const std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ') ++pos;
        if (pos > start) words.push_back(line.substr(start, pos - start));
    }
    return words;
}

}  // namespace

std::string format_instance(const Instance& inst) {
    std::ostringstream out;
    std::visit(
        [&](const auto& in) {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, XorInstance>) {
                out << "KXOR " << in.k() << ' ' << in.n() << ' ' << in.r() << '\n';
                const unsigned digits = (in.n() + 3) / 4;
                char buf[32];
                for (auto v : in.elements()) {
                    std::snprintf(buf, sizeof buf, "%0*llx", static_cast<int>(digits), static_cast<unsigned long long>(v));
                    out << buf << '\n';
                }
            } else if constexpr (std::is_same_v<T, SumInstance>) {
                out << "KSUM " << in.k() << ' ' << in.bound() << ' ' << in.r() << '\n';
                for (auto v : in.elements()) out << v << '\n';
            } else {
                out << "KMSUM " << in.k() << ' ' << in.modulus() << ' ' << in.r() << '\n';
                for (auto v : in.elements()) out << v << '\n';
            }
        },
        inst);
    return out.str();
}

Instance parse_instance_text(std::string_view text) {
    if (text.find('\r') != std::string_view::npos) throw FormatError("instance: CR line endings are not accepted");
    const auto lines = split_lines(text);
    if (lines.empty()) throw FormatError("instance: empty input");
    const auto head = split_words(lines[0]);
    if (head.size() != 4) throw FormatError("instance: header needs four fields");
    const auto k = parse_number<std::size_t>(head[1], 10, "k");
    const auto r = parse_number<std::size_t>(head[3], 10, "r");
    if (lines.size() != r + 1) throw FormatError("instance: expected " + std::to_string(r) + " element lines");

    if (head[0] == "KXOR") {
        const auto n = parse_number<unsigned>(head[2], 10, "n");
        if (n < 1 || n > kMaxWidth) throw FormatError("instance: n must be in [1, 63]");
        std::vector<std::uint64_t> e;
        for (std::size_t i = 1; i <= r; ++i) {
            if (lines[i].size() != (n + 3) / 4) throw FormatError("instance: hex element has the wrong width");
            for (char c : lines[i])
                if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) throw FormatError("instance: elements must be lowercase hex");
            e.push_back(parse_number<std::uint64_t>(lines[i], 16, "element"));
        }
        return XorInstance(k, n, std::move(e));
    }
    if (head[0] == "KSUM") {
        const auto bound = parse_number<std::int64_t>(head[2], 10, "N");
        std::vector<std::int64_t> e;
        for (std::size_t i = 1; i <= r; ++i) e.push_back(parse_number<std::int64_t>(lines[i], 10, "element"));
        return SumInstance(k, bound, std::move(e));
    }
    if (head[0] == "KMSUM") {
        const auto modulus = parse_number<std::uint64_t>(head[2], 10, "L");
        std::vector<std::uint64_t> e;
        for (std::size_t i = 1; i <= r; ++i) e.push_back(parse_number<std::uint64_t>(lines[i], 10, "element"));
        return MSumInstance(k, modulus, std::move(e));
    }
    throw FormatError("instance: unknown header tag '" + std::string(head[0]) + "'");
}

Instance parse_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("instance: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance_text(buf.str());
}

void write_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("instance: cannot write " + path);
    out << format_instance(inst);
    if (!out) throw std::runtime_error("instance: write failed for " + path);
}

}  // namespace ksumforge
