#include "snb/dictionaries.hpp"

#include <array>

namespace snb::dict {

namespace {

using SV = std::string_view;

constexpr std::array<SV, 8> kIndiaFirst{"Aarav", "Vivaan", "Aditya", "Priya", "Ananya", "Rahul", "Deepa", "Kiran"};
constexpr std::array<SV, 6> kIndiaLast{"Sharma", "Patel", "Singh", "Kumar", "Gupta", "Reddy"};
constexpr std::array<SV, 8> kChinaFirst{"Wei", "Jing", "Li", "Min", "Hao", "Xiu", "Yan", "Lei"};
constexpr std::array<SV, 6> kChinaLast{"Wang", "Zhang", "Liu", "Chen", "Yang", "Zhao"};
constexpr std::array<SV, 8> kUsFirst{"James", "Mary", "John", "Linda", "Robert", "Susan", "Emily", "David"};
constexpr std::array<SV, 6> kUsLast{"Smith", "Johnson", "Brown", "Miller", "Davis", "Wilson"};
constexpr std::array<SV, 8> kBrazilFirst{"Joao", "Ana", "Pedro", "Mariana", "Lucas", "Beatriz", "Gabriel", "Julia"};
constexpr std::array<SV, 6> kBrazilLast{"Silva", "Santos", "Oliveira", "Souza", "Lima", "Costa"};
constexpr std::array<SV, 8> kGermanyFirst{"Lukas", "Anna", "Jonas", "Lea", "Felix", "Mia", "Paul", "Lena"};
constexpr std::array<SV, 6> kGermanyLast{"Mueller", "Schmidt", "Schneider", "Fischer", "Weber", "Wagner"};
constexpr std::array<SV, 8> kFranceFirst{"Louis", "Camille", "Hugo", "Chloe", "Jules", "Manon", "Arthur", "Lea"};
constexpr std::array<SV, 6> kFranceLast{"Martin", "Bernard", "Dubois", "Durand", "Leroy", "Moreau"};
constexpr std::array<SV, 6> kSpainFirst{"Alejandro", "Lucia", "Pablo", "Sofia", "Daniel", "Martina"};
constexpr std::array<SV, 6> kSpainLast{"Garcia", "Fernandez", "Lopez", "Martinez", "Sanchez", "Perez"};
constexpr std::array<SV, 6> kItalyFirst{"Francesco", "Giulia", "Alessandro", "Chiara", "Matteo", "Sara"};
constexpr std::array<SV, 6> kItalyLast{"Rossi", "Russo", "Ferrari", "Esposito", "Bianchi", "Romano"};
constexpr std::array<SV, 6> kJapanFirst{"Haruto", "Yui", "Sota", "Hina", "Ren", "Aoi"};
constexpr std::array<SV, 6> kJapanLast{"Sato", "Suzuki", "Takahashi", "Tanaka", "Watanabe", "Ito"};
constexpr std::array<SV, 6> kHungaryFirst{"Bence", "Anna", "Mate", "Zsofia", "Levente", "Reka"};
constexpr std::array<SV, 6> kHungaryLast{"Nagy", "Kovacs", "Toth", "Szabo", "Horvath", "Varga"};
constexpr std::array<SV, 6> kNetherlandsFirst{"Daan", "Emma", "Sem", "Julia", "Lucas", "Tess"};
constexpr std::array<SV, 6> kNetherlandsLast{"de Jong", "Jansen", "de Vries", "van Dijk", "Bakker", "Visser"};
constexpr std::array<SV, 6> kKenyaFirst{"Wanjiru", "Otieno", "Achieng", "Kamau", "Njeri", "Mwangi"};
constexpr std::array<SV, 6> kKenyaLast{"Odhiambo", "Kariuki", "Mutua", "Kipchoge", "Wambui", "Ochieng"};

const std::array<Country, 12> kCountries{{
    {1, "India", kIndiaFirst, kIndiaLast},
    {2, "China", kChinaFirst, kChinaLast},
    {3, "United_States", kUsFirst, kUsLast},
    {4, "Brazil", kBrazilFirst, kBrazilLast},
    {5, "Germany", kGermanyFirst, kGermanyLast},
    {6, "France", kFranceFirst, kFranceLast},
    {7, "Spain", kSpainFirst, kSpainLast},
    {8, "Italy", kItalyFirst, kItalyLast},
    {9, "Japan", kJapanFirst, kJapanLast},
    {10, "Hungary", kHungaryFirst, kHungaryLast},
    {11, "Netherlands", kNetherlandsFirst, kNetherlandsLast},
    {12, "Kenya", kKenyaFirst, kKenyaLast},
}};

const std::array<University, 24> kUniversities{{
    {101, 1, "IIT_Bombay"},          {102, 1, "University_of_Delhi"},
    {103, 2, "Tsinghua_University"}, {104, 2, "Fudan_University"},
    {105, 3, "MIT"},                 {106, 3, "Stanford_University"},
    {107, 4, "USP"},                 {108, 4, "UFRJ"},
    {109, 5, "TU_Munich"},           {110, 5, "Heidelberg_University"},
    {111, 6, "Sorbonne"},            {112, 6, "Ecole_Polytechnique"},
    {113, 7, "Complutense"},         {114, 7, "UPC_Barcelona"},
    {115, 8, "Politecnico_di_Milano"}, {116, 8, "Sapienza"},
    {117, 9, "University_of_Tokyo"}, {118, 9, "Kyoto_University"},
    {119, 10, "BME"},                {120, 10, "ELTE"},
    {121, 11, "TU_Eindhoven"},       {122, 11, "VU_Amsterdam"},
    {123, 12, "University_of_Nairobi"}, {124, 12, "Strathmore_University"},
}};

const std::array<Tag, 32> kTags{{
    {1001, "Football"},   {1002, "Music"},       {1003, "Movies"},      {1004, "Politics"},
    {1005, "Cooking"},    {1006, "Travel"},      {1007, "Photography"}, {1008, "Databases"},
    {1009, "Chess"},      {1010, "Basketball"},  {1011, "Jazz"},        {1012, "Hiking"},
    {1013, "Gardening"},  {1014, "Astronomy"},   {1015, "History"},     {1016, "Poetry"},
    {1017, "Cycling"},    {1018, "Painting"},    {1019, "Tennis"},      {1020, "Gaming"},
    {1021, "Economics"},  {1022, "Fashion"},     {1023, "Robotics"},    {1024, "Yoga"},
    {1025, "Opera"},      {1026, "Sailing"},     {1027, "Anime"},       {1028, "Climbing"},
    {1029, "Coffee"},     {1030, "Comics"},      {1031, "Theatre"},     {1032, "Baking"},
}};

} // namespace

std::span<const Country> countries() { return kCountries; }
std::span<const University> universities() { return kUniversities; }
std::span<const Tag> tags() { return kTags; }

const Country* find_country(EntityId id) {
    for (const auto& c : kCountries)
        if (c.id == id) return &c;
    return nullptr;
}

} // namespace snb::dict
