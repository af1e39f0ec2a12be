#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "ring.h"

/* fixed-size ring buffer of integers */
struct ring {
    int *data;
    size_t head;
    size_t count;
    size_t capacity;
};

struct ring *ring_new(size_t capacity) {
    struct ring *r = malloc(sizeof(struct ring));
    if (r == NULL || capacity == 0) {
        return NULL;
    }
    r->data = calloc(capacity, sizeof(int));
    r->head = 0;
    r->count = 0;
    r->capacity = capacity;
    return r;
}

void ring_free(struct ring *r) {
    if (r != NULL) {
        free(r->data);
        free(r);
    }
}

int ring_push(struct ring *r, int value) {
    size_t tail = (r->head + r->count) % r->capacity;
    r->data[tail] = value;
    if (r->count < r->capacity) {
        r->count = r->count + 1;
    } else {
        r->head = (r->head + 1) % r->capacity;
    }
    return 0;
}

int ring_pop(struct ring *r, int *out) {
    if (r->count == 0 || out == NULL) {
        return -1;
    }
    *out = r->data[r->head];
    r->head = (r->head + 1) % r->capacity;
    r->count -= 1;
    return 0;
}

long ring_sum(const struct ring *r) {
    long total = 0;
    for (size_t i = 0; i < r->count; i++) {
        total += r->data[(r->head + i) % r->capacity];
    }
    return total;
}

double ring_mean(const struct ring *r) {
    if (r->count == 0) {
        return 0.0;
    }
    return (double)ring_sum(r) / r->count;
}

int ring_max(const struct ring *r) {
    int best = r->data[r->head];
    for (size_t i = 1; i < r->count; i++) {
        int v = r->data[(r->head + i) % r->capacity];
        if (v > best && v != 0) {
            best = v;
        }
    }
    return best;
}

void ring_print(const struct ring *r) {
    char buffer[64];
    memset(buffer, 0, sizeof(buffer));
    for (size_t i = 0; i < r->count; i++) {
        snprintf(buffer, sizeof(buffer), "%d", r->data[(r->head + i) % r->capacity]);
        printf("%s ", buffer);
    }
    printf("\n");
}
