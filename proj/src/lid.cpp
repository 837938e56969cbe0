#include "marginmine/lid.hpp"

#include "marginmine/errors.hpp"
#include "marginmine/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace marginmine {

namespace {

constexpr double kFloorProb = 1e-12;

std::vector<UChar32> folded_codepoints(const std::string& text) {
    std::vector<UChar32> cps;
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto len = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < len) {
        UChar32 cp;
        U8_NEXT(s, i, len, cp);
        if (cp < 0) {
            continue;
        }
        cps.push_back(u_tolower(cp));
    }
    return cps;
}

std::string encode_ngram(const std::vector<UChar32>& cps, std::size_t begin,
                         std::size_t n) {
    icu::UnicodeString us;
    for (std::size_t j = 0; j < n; ++j) {
        us.append(cps[begin + j]);
    }
    std::string out;
    us.toUTF8String(out);
    return out;
}

double score_sentence(const LidModel::LangTables& tables,
                      const std::vector<UChar32>& cps) {
    double score = 0.0;
    for (std::size_t n = 1; n <= 3; ++n) {
        if (cps.size() < n) {
            break;
        }
        const auto& table = tables.logp[n - 1];
        for (std::size_t i = 0; i + n <= cps.size(); ++i) {
            const std::string gram = encode_ngram(cps, i, n);
            const auto it = table.find(gram);
            score += it != table.end() ? it->second : tables.floor_logp[n - 1];
        }
    }
    return score;
}

LidPrediction predict(const LidModel& model, const std::string& sentence) {
    if (model.langs.empty()) {
        throw data_error("language model has no languages");
    }
    const std::vector<UChar32> cps = folded_codepoints(sentence);
    std::vector<double> scores;
    scores.reserve(model.langs.size());
    for (const auto& tables : model.langs) {
        scores.push_back(score_sentence(tables, cps));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    const double max_score = scores[best];
    double z = 0.0;
    for (const double s : scores) {
        z += std::exp(s - max_score);
    }
    LidPrediction out;
    out.lang = model.langs[best].lang;
    out.confidence = 1.0 / z;
    return out;
}

} // namespace

LidModel train_lid(
    const std::vector<std::pair<std::string, std::string>>& labeled,
    double alpha) {
    if (labeled.empty()) {
        throw data_error("language-id training set is empty");
    }
    if (alpha < 0.0) {
        throw parameter_error("smoothing alpha must be >= 0");
    }

    struct Counts {
        std::array<std::map<std::string, std::uint64_t>, 3> ngrams;
        std::array<std::uint64_t, 3> totals{};
        std::size_t examples = 0;
    };
    std::map<std::string, Counts> per_lang;
    std::array<std::set<std::string>, 3> vocab;

    for (const auto& [sentence, lang] : labeled) {
        if (lang.empty()) {
            throw data_error("language-id example has an empty label");
        }
        Counts& counts = per_lang[lang];
        ++counts.examples;
        const std::vector<UChar32> cps = folded_codepoints(sentence);
        for (std::size_t n = 1; n <= 3; ++n) {
            if (cps.size() < n) {
                break;
            }
            for (std::size_t i = 0; i + n <= cps.size(); ++i) {
                const std::string gram = encode_ngram(cps, i, n);
                ++counts.ngrams[n - 1][gram];
                ++counts.totals[n - 1];
                vocab[n - 1].insert(gram);
            }
        }
    }
    for (const auto& [lang, counts] : per_lang) {
        if (counts.examples == 0 || counts.totals[0] == 0) {
            throw data_error("language '" + lang +
                             "' has no usable training examples");
        }
    }

    LidModel model;
    model.alpha = alpha;
    for (const auto& [lang, counts] : per_lang) {
        LidModel::LangTables tables;
        tables.lang = lang;
        for (std::size_t n = 0; n < 3; ++n) {
            const double denom =
                static_cast<double>(counts.totals[n]) +
                alpha * static_cast<double>(vocab[n].size());
            for (const auto& gram : vocab[n]) {
                const auto it = counts.ngrams[n].find(gram);
                const double count =
                    it != counts.ngrams[n].end()
                        ? static_cast<double>(it->second)
                        : 0.0;
                const double p =
                    denom > 0.0 ? (count + alpha) / denom : 0.0;
                tables.logp[n][gram] = std::log(std::max(p, kFloorProb));
            }
            const double floor_p =
                denom > 0.0 ? alpha / denom : 0.0;
            tables.floor_logp[n] = std::log(std::max(floor_p, kFloorProb));
        }
        model.langs.push_back(std::move(tables));
    }
    // std::map already iterates in sorted order; keep the contract explicit.
    std::sort(model.langs.begin(), model.langs.end(),
              [](const LidModel::LangTables& a, const LidModel::LangTables& b) {
                  return a.lang < b.lang;
              });
    return model;
}

LidPrediction classify(const LidModel& model, const std::string& sentence) {
    return predict(model, sentence);
}

LidFilterResult lid_filter(const std::vector<std::string>& sentences,
                           const std::string& expected, const LidModel& model,
                           std::size_t threads) {
    const bool covered =
        std::any_of(model.langs.begin(), model.langs.end(),
                    [&](const LidModel::LangTables& t) {
                        return t.lang == expected;
                    });
    if (!covered) {
        throw config_error("language model does not cover '" + expected +
                           "'");
    }
    std::vector<LidPrediction> predictions(sentences.size());
    parallel_for(sentences.size(), threads,
                 [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            predictions[i] = predict(model, sentences[i]);
        }
    });

    LidFilterResult result;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (predictions[i].lang == expected) {
            result.kept.push_back(sentences[i]);
            result.kept_indices.push_back(i);
        } else {
            result.dropped.push_back({i, sentences[i], predictions[i].lang,
                                      predictions[i].confidence});
        }
    }
    return result;
}

LidFilterResult lid_filter_with_labels(
    const std::vector<std::string>& sentences, const std::string& expected,
    const std::vector<std::string>& labels) {
    if (labels.size() != sentences.size()) {
        throw consistency_error(
            "label file has " + std::to_string(labels.size()) +
            " entries for " + std::to_string(sentences.size()) +
            " sentences");
    }
    LidFilterResult result;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (labels[i] == expected) {
            result.kept.push_back(sentences[i]);
            result.kept_indices.push_back(i);
        } else {
            result.dropped.push_back({i, sentences[i], labels[i], 1.0});
        }
    }
    return result;
}

std::vector<std::string> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open label file: " + path.string());
    }
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        labels.push_back(line);
    }
    return labels;
}

const std::vector<std::pair<std::string, std::string>>& builtin_lid_corpus() {
    static const std::vector<std::pair<std::string, std::string>> corpus = {
        {"The weather is cold today and the streets are quiet.", "en"},
        {"She bought fresh bread and cheese at the market this morning.",
         "en"},
        {"We are planning a short trip to the mountains next week.", "en"},
        {"The children played football in the park until it got dark.", "en"},
        {"This book explains the history of the old town very well.", "en"},
        {"He works at the hospital and comes home late every evening.", "en"},
        {"Please close the window before you leave the house.", "en"},
        {"The train to the city leaves every hour from platform two.", "en"},

        {"Das Wetter ist heute kalt und die Straßen sind ruhig.", "de"},
        {"Sie hat heute Morgen frisches Brot und Käse auf dem Markt gekauft.",
         "de"},
        {"Wir planen nächste Woche einen kurzen Ausflug in die Berge.", "de"},
        {"Die Kinder spielten im Park Fußball, bis es dunkel wurde.", "de"},
        {"Dieses Buch erklärt die Geschichte der Altstadt sehr gut.", "de"},
        {"Er arbeitet im Krankenhaus und kommt jeden Abend spät nach Hause.",
         "de"},
        {"Bitte schließe das Fenster, bevor du das Haus verlässt.", "de"},
        {"Der Zug in die Stadt fährt jede Stunde von Gleis zwei.", "de"},

        {"Le temps est froid aujourd'hui et les rues sont calmes.", "fr"},
        {"Elle a acheté du pain frais et du fromage au marché ce matin.",
         "fr"},
        {"Nous prévoyons un court voyage à la montagne la semaine prochaine.",
         "fr"},
        {"Les enfants ont joué au football dans le parc jusqu'à la nuit.",
         "fr"},
        {"Ce livre explique très bien l'histoire de la vieille ville.", "fr"},
        {"Il travaille à l'hôpital et rentre tard tous les soirs.", "fr"},
        {"Ferme la fenêtre avant de quitter la maison, s'il te plaît.", "fr"},
        {"Le train pour la ville part toutes les heures du quai deux.", "fr"},

        {"El tiempo está frío hoy y las calles están tranquilas.", "es"},
        {"Ella compró pan fresco y queso en el mercado esta mañana.", "es"},
        {"Planeamos un viaje corto a las montañas la próxima semana.", "es"},
        {"Los niños jugaron al fútbol en el parque hasta que oscureció.",
         "es"},
        {"Este libro explica muy bien la historia del casco antiguo.", "es"},
        {"Él trabaja en el hospital y vuelve tarde a casa cada noche.", "es"},
        {"Por favor, cierra la ventana antes de salir de la casa.", "es"},
        {"El tren a la ciudad sale cada hora desde el andén dos.", "es"},

        {"Oggi il tempo è freddo e le strade sono tranquille.", "it"},
        {"Ha comprato pane fresco e formaggio al mercato questa mattina.",
         "it"},
        {"Stiamo programmando una breve gita in montagna la prossima "
         "settimana.",
         "it"},
        {"I bambini hanno giocato a calcio nel parco fino al buio.", "it"},
        {"Questo libro spiega molto bene la storia del centro storico.",
         "it"},
        {"Lavora in ospedale e torna a casa tardi ogni sera.", "it"},
        {"Per favore chiudi la finestra prima di uscire di casa.", "it"},
        {"Il treno per la città parte ogni ora dal binario due.", "it"},

        {"O tempo está frio hoje e as ruas estão tranquilas.", "pt"},
        {"Ela comprou pão fresco e queijo no mercado esta manhã.", "pt"},
        {"Estamos a planear uma viagem curta às montanhas na próxima semana.",
         "pt"},
        {"As crianças jogaram futebol no parque até escurecer.", "pt"},
        {"Este livro explica muito bem a história da cidade velha.", "pt"},
        {"Ele trabalha no hospital e chega tarde a casa todas as noites.",
         "pt"},
        {"Por favor, fecha a janela antes de saíres de casa.", "pt"},
        {"O comboio para a cidade parte de hora em hora da linha dois.",
         "pt"},

        {"Het weer is vandaag koud en de straten zijn rustig.", "nl"},
        {"Ze kocht vanochtend vers brood en kaas op de markt.", "nl"},
        {"We plannen volgende week een kort uitstapje naar de bergen.", "nl"},
        {"De kinderen voetbalden in het park tot het donker werd.", "nl"},
        {"Dit boek legt de geschiedenis van de oude stad goed uit.", "nl"},
        {"Hij werkt in het ziekenhuis en komt elke avond laat thuis.", "nl"},
        {"Doe alsjeblieft het raam dicht voordat je het huis verlaat.", "nl"},
        {"De trein naar de stad vertrekt elk uur van spoor twee.", "nl"},

        {"Pogoda jest dziś zimna, a ulice są spokojne.", "pl"},
        {"Kupiła dziś rano świeży chleb i ser na targu.", "pl"},
        {"Planujemy krótką wycieczkę w góry w przyszłym tygodniu.", "pl"},
        {"Dzieci grały w piłkę w parku, aż zrobiło się ciemno.", "pl"},
        {"Ta książka bardzo dobrze opisuje historię starego miasta.", "pl"},
        {"On pracuje w szpitalu i codziennie wraca późno do domu.", "pl"},
        {"Proszę, zamknij okno, zanim wyjdziesz z domu.", "pl"},
        {"Pociąg do miasta odjeżdża co godzinę z peronu drugiego.", "pl"},

        {"Сегодня холодная погода, и улицы очень тихие.", "ru"},
        {"Утром она купила на рынке свежий хлеб и сыр.", "ru"},
        {"Мы планируем короткую поездку в горы на следующей неделе.", "ru"},
        {"Дети играли в футбол в парке, пока не стемнело.", "ru"},
        {"Эта книга хорошо объясняет историю старого города.", "ru"},
        {"Он работает в больнице и каждый вечер поздно возвращается домой.",
         "ru"},
        {"Пожалуйста, закрой окно, прежде чем выйти из дома.", "ru"},
        {"Поезд в город отправляется каждый час со второй платформы.", "ru"},

        {"Ma hideg az idő, és az utcák nagyon csendesek.", "hu"},
        {"Ma reggel friss kenyeret és sajtot vett a piacon.", "hu"},
        {"Jövő héten egy rövid kirándulást tervezünk a hegyekbe.", "hu"},
        {"A gyerekek fociztak a parkban, amíg be nem sötétedett.", "hu"},
        {"Ez a könyv nagyon jól elmagyarázza az óváros történetét.", "hu"},
        {"A kórházban dolgozik, és minden este későn ér haza.", "hu"},
        {"Kérlek, csukd be az ablakot, mielőtt elhagyod a házat.", "hu"},
        {"A vonat a városba minden órában indul a második vágányról.", "hu"},

        {"Cuaca hari ini dingin dan jalan-jalan sangat sepi.", "id"},
        {"Dia membeli roti segar dan keju di pasar pagi ini.", "id"},
        {"Kami merencanakan perjalanan singkat ke pegunungan minggu depan.",
         "id"},
        {"Anak-anak bermain sepak bola di taman sampai hari gelap.", "id"},
        {"Buku ini menjelaskan sejarah kota tua dengan sangat baik.", "id"},
        {"Dia bekerja di rumah sakit dan pulang larut malam setiap hari.",
         "id"},
        {"Tolong tutup jendela sebelum kamu meninggalkan rumah.", "id"},
        {"Kereta ke kota berangkat setiap jam dari peron dua.", "id"},

        {"今天天气很冷，街道非常安静。", "zh"},
        {"她今天早上在市场买了新鲜的面包和奶酪。", "zh"},
        {"我们计划下周去山里做一次短途旅行。", "zh"},
        {"孩子们在公园里踢足球，直到天黑。", "zh"},
        {"这本书很好地讲述了老城的历史。", "zh"},
        {"他在医院工作，每天晚上很晚回家。", "zh"},
        {"请在离开房子之前把窗户关上。", "zh"},
        {"去城里的火车每小时从二号站台出发。", "zh"},
    };
    return corpus;
}

const LidModel& builtin_lid_model() {
    static const LidModel model = train_lid(builtin_lid_corpus(), 0.5);
    return model;
}

} // namespace marginmine
