#include "forcerecon/forcing/map_descriptor.hpp"

#include <optional>
#include <sstream>

#include "forcerecon/util/keyvalue.hpp"

namespace forcerecon {

namespace {

Wavevector read_vector(const std::vector<std::string>& w, std::size_t at, int dim, const std::string& what) {
    Wavevector k{0, 0, 0};
    for (int a = 0; a < dim; ++a) k[a] = static_cast<int>(parse_integer(w.at(at + a), what));
    return k;
}

void write_vector(std::ostream& os, const Wavevector& k, int dim) {
    for (int a = 0; a < dim; ++a) os << k[a] << ' ';
}

}  // namespace

EnslavingMap parse_map_descriptor(const std::string& text, const std::string& source_name) {
    std::string kind;
    std::optional<int> rank;
    MapOrder order = kWeakOrder;
    int dim = 2;
    PowerLawTail tail;
    std::vector<std::vector<std::string>> overrides, entries;
    for (const auto& kv : parse_key_values(text, source_name)) {
        const std::string where = source_name + ":" + std::to_string(kv.line);
        if (!kv.section.empty()) throw ParseError(where + ": map descriptors have no sections");
        if (kv.key == "kind") kind = kv.value;
        else if (kv.key == "rank") rank = static_cast<int>(parse_integer(kv.value, where));
        else if (kv.key == "alpha") order.alpha = parse_real(kv.value, where);
        else if (kv.key == "beta") order.beta = parse_real(kv.value, where);
        else if (kv.key == "dim") dim = static_cast<int>(parse_integer(kv.value, where));
        else if (kv.key == "profile") {
            if (kv.value == "power") tail.profile = PowerLawTail::Profile::power;
            else if (kv.value == "exponential") tail.profile = PowerLawTail::Profile::exponential;
            else throw ParseError(where + ": profile must be power or exponential");
        } else if (kv.key == "exponent") tail.exponent = parse_real(kv.value, where);
        else if (kv.key == "weight") tail.weight = parse_real(kv.value, where);
        else if (kv.key == "override") overrides.push_back(split_words(kv.value));
        else if (kv.key == "entry") entries.push_back(split_words(kv.value));
        else throw ParseError(where + ": unknown key '" + kv.key + "'");
    }
    if (!rank) throw ParseError(source_name + ": missing rank");
    if (dim != 2 && dim != 3) throw ParseError(source_name + ": dim must be 2 or 3");
    if (kind == "zero") return EnslavingMap::zero(*rank, order);
    if (kind == "power_law_tail") {
        tail.dim = dim;
        for (const auto& w : overrides) {
            if (w.size() != std::size_t(dim) + 1) throw ParseError(source_name + ": override needs dim+1 numbers");
            tail.overrides.emplace_back(read_vector(w, 0, dim, source_name), parse_real(w.back(), source_name));
        }
        return EnslavingMap::power_law_tail(*rank, tail, order);
    }
    if (kind == "fourierwise") {
        FourierwiseTable table;
        table.dim = dim;
        for (const auto& w : entries) {
            if (w.size() != std::size_t(2 * dim) + 2) throw ParseError(source_name + ": entry needs 2*dim+2 numbers");
            table.linear.push_back({read_vector(w, 0, dim, source_name), read_vector(w, dim, dim, source_name),
                                    Complex(parse_real(w[2 * dim], source_name), parse_real(w[2 * dim + 1], source_name))});
        }
        return EnslavingMap::fourierwise(*rank, table, order);
    }
    throw ParseError(source_name + ": unknown map kind '" + kind + "'");
}

EnslavingMap load_map_descriptor(const std::string& path) { return parse_map_descriptor(read_text_file(path), path); }

std::string format_map_descriptor(const EnslavingMap& map) {
    if (map.base_map()) throw std::invalid_argument("rank-raised maps are described by their base map");
    std::ostringstream os;
    os.precision(17);
    os << "kind = " << to_string(map.kind()) << "\nrank = " << map.rank() << "\nalpha = " << map.order().alpha
       << "\nbeta = " << map.order().beta << '\n';
    if (const auto* p = map.power_law_params()) {
        os << "dim = " << p->dim << "\nprofile = " << (p->profile == PowerLawTail::Profile::power ? "power" : "exponential")
           << "\nexponent = " << p->exponent << "\nweight = " << p->weight << '\n';
        for (const auto& [k, w] : p->overrides) {
            os << "override = ";
            write_vector(os, k, p->dim);
            os << w << '\n';
        }
    }
    if (const auto* t = map.fourierwise_table()) {
        if (!t->custom.empty()) throw std::invalid_argument("custom fourierwise entries have no text form");
        os << "dim = " << t->dim << '\n';
        for (const auto& e : t->linear) {
            os << "entry = ";
            write_vector(os, e.target, t->dim);
            write_vector(os, e.source, t->dim);
            os << e.gain.real() << ' ' << e.gain.imag() << '\n';
        }
    }
    return os.str();
}

}  // namespace forcerecon
