package ledger

import (
	"errors"
	"fmt"
	"sort"
	"strings"
)

// Entry is one booking line.
type Entry struct {
	Account string
	Amount  int64
	Memo    string
}

// Ledger keeps balances per account.
type Ledger struct {
	entries  []Entry
	balances map[string]int64
	limit    int64
}

var ErrLimit = errors.New("limit exceeded")

func NewLedger(limit int64) *Ledger {
	return &Ledger{balances: make(map[string]int64), limit: limit}
}

// Post books an amount against an account.
func (l *Ledger) Post(account string, amount int64, memo string) error {
	if account == "" || amount == 0 {
		return fmt.Errorf("invalid entry for %q", account)
	}
	next := l.balances[account] + amount
	if next > l.limit || next < -l.limit {
		return ErrLimit
	}
	l.balances[account] = next
	l.entries = append(l.entries, Entry{Account: account, Amount: amount, Memo: memo})
	return nil
}

// Transfer moves an amount between two accounts.
func (l *Ledger) Transfer(from, to string, amount int64) error {
	if from == to {
		return errors.New("same account")
	}
	if err := l.Post(from, -amount, "transfer out"); err != nil {
		return err
	}
	return l.Post(to, amount, "transfer in")
}

func (l *Ledger) Balance(account string) int64 {
	return l.balances[account]
}

// Accounts lists account names in order.
func (l *Ledger) Accounts() []string {
	names := make([]string, 0, len(l.balances))
	for name := range l.balances {
		names = append(names, name)
	}
	sort.Strings(names)
	return names
}

func (l *Ledger) Total() int64 {
	var total int64
	for _, amount := range l.balances {
		total = total + amount
	}
	return total
}

// Average returns the mean posting size.
func (l *Ledger) Average() float64 {
	count := len(l.entries)
	if count == 0 {
		return 0
	}
	var sum int64
	for _, e := range l.entries {
		sum += e.Amount
	}
	return float64(sum) / float64(count)
}

func (l *Ledger) Report() string {
	var b strings.Builder
	for _, name := range l.Accounts() {
		line := fmt.Sprintf("%-12s %10d\n", name, l.balances[name])
		b.WriteString(line)
	}
	return b.String()
}

// Scale multiplies every balance by a percentage.
func (l *Ledger) Scale(percent int64) {
	for name, value := range l.balances {
		l.balances[name] = value * percent / 100
	}
}

func (l *Ledger) Overdrawn() []string {
	var out []string
	for _, name := range l.Accounts() {
		if l.balances[name] < 0 && len(name) > 1 {
			out = append(out, name)
		}
	}
	return out
}
