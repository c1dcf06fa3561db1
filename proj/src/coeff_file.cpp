#include "pktdet/coeff_file.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace pktdet {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::string format_coefficients(const CoefficientBank& bank) {
    std::string out = "n=" + std::to_string(bank.length()) + "\n";
    char buf[16];
    for (auto words : {bank.i_words(), bank.q_words()}) {
        for (std::uint32_t w : words) {
            std::snprintf(buf, sizeof buf, "%08x\n", w);
            out += buf;
        }
    }
    return out;
}

CoefficientBank parse_coefficients(std::string_view text) {
    std::size_t length = 0;
    bool have_length = false;
    std::vector<std::uint32_t> words;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = trim(line.substr(0, hash));
        }
        if (line.empty()) {
            continue;
        }
        auto fail = [&](const std::string& what) {
            return CoeffFormatError("coefficient file line " + std::to_string(line_no) + ": " + what);
        };
        if (!have_length) {
            if (line.substr(0, 2) != "n=") {
                throw fail("expected 'n=<length>' header");
            }
            const auto digits = line.substr(2);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), length);
            if (ec != std::errc{} || ptr != digits.data() + digits.size() || length == 0) {
                throw fail("bad length");
            }
            have_length = true;
            continue;
        }
        if (line.size() > 2 && line[0] == '0' && (line[1] == 'x' || line[1] == 'X')) {
            line.remove_prefix(2);
        }
        std::uint32_t w = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), w, 16);
        if (ec != std::errc{} || ptr != line.data() + line.size()) {
            throw fail("bad hex word '" + std::string(line) + "'");
        }
        words.push_back(w);
    }
    if (!have_length) {
        throw CoeffFormatError("coefficient file is missing its 'n=<length>' header");
    }
    const std::size_t per_component = (length + 31) / 32;
    if (words.size() != 2 * per_component) {
        throw CoeffFormatError("coefficient file has " + std::to_string(words.size()) + " words, expected " +
                               std::to_string(2 * per_component));
    }
    std::vector<std::uint32_t> i_words(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(per_component));
    std::vector<std::uint32_t> q_words(words.begin() + static_cast<std::ptrdiff_t>(per_component), words.end());
    try {
        return CoefficientBank::from_words(length, std::move(i_words), std::move(q_words));
    } catch (const std::invalid_argument& e) {
        throw CoeffFormatError(e.what());
    }
}

CoefficientBank read_coefficient_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw CoeffFormatError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_coefficients(ss.str());
}

} // namespace pktdet
